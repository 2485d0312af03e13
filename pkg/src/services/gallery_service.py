import logging
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.models.config import Tolerances
from src.models.errors import (
    CertificationFailed, DegenerateSpectrum, DomainError, IllConditionedGram,
    InvalidParameter, NotPositive,
)
from src.models.gallery import OmegaParametrization
from src.models.pairs import GenericPair, ProjectionPair
from src.services.davis_service import DavisService
from src.services.decomposition_service import DecompositionService
from src.services.orbit_service import OrbitService
from src.services.spectral_service import SpectralService, adjoint, hermitian_part

logger = logging.getLogger(__name__)

MAX_GRAM_CONDITION = 1e12


def mobius(point: complex, z: np.ndarray) -> np.ndarray:
    """Blaschke factor (|p|/p)(p - z)/(1 - conj(p) z); the factor at p = 0 is z."""
    if point == 0:
        return np.asarray(z, dtype=complex)
    return (abs(point) / point) * (point - z) / (1.0 - np.conj(point) * z)


def blaschke(points: Sequence[complex], z: np.ndarray) -> np.ndarray:
    result = np.ones_like(np.asarray(z, dtype=complex))
    for point in points:
        result = result * mobius(point, z)
    return result


def szego_kernel(point: complex, z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 - np.conj(point) * np.asarray(z, dtype=complex))


class GalleryService:
    """Finite-dimensional example pairs used as fixtures across the library."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances or Tolerances()
        self.spectral = SpectralService(self.tolerances)
        self.decomposition = DecompositionService(self.tolerances)
        self.davis = DavisService(self.tolerances)
        self.orbit = OrbitService(self.tolerances)

    def theta_pair(self, thetas: Sequence[float]) -> GenericPair:
        """Halmos model pair P = [[1,0],[0,0]], Q = [[C^2,CS],[CS,S^2]]."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        if thetas.size == 0 or np.any(thetas <= 0) or np.any(thetas >= np.pi / 2):
            raise InvalidParameter('angles must lie strictly inside (0, pi/2)', {'thetas': thetas.tolist()})
        k = thetas.size
        C, S = np.diag(np.cos(thetas)), np.diag(np.sin(thetas))
        I, O = np.eye(k), np.zeros((k, k))
        P = np.block([[I, O], [O, O]]).astype(complex)
        Q = np.block([[C @ C, C @ S], [C @ S, S @ S]]).astype(complex)
        return GenericPair(P, Q)

    def random_generic_pair(self, m: int, seed=None) -> GenericPair:
        """Generic pair with random angles in [0.1, pi/2 - 0.1] and a Haar-random frame."""
        if m < 2 or m % 2:
            raise InvalidParameter('m must be a positive even number', {'m': m})
        rng = np.random.default_rng(seed)
        model = self.theta_pair(rng.uniform(0.1, np.pi / 2 - 0.1, m // 2))
        return self.davis.conjugate_pair(self.spectral.haar_unitary(m, rng), model)

    def discretized_mt(self, n: int, phases: Optional[Sequence[float]] = None) -> ProjectionPair:
        """
        Multiplication by the variable on a symmetric midpoint grid.

        Args:
            n: even grid size
            phases: optional real angles phi; the symmetry becomes diag(e^{i phi}) R diag(e^{-i phi})

        Returns:
            ProjectionPair (P_V, Q_V) with P_V - Q_V = diag(t)
        """
        if n < 2 or n % 2:
            raise InvalidParameter('n must be an even number >= 2', {'n': n})
        t = (2.0 * np.arange(1, n + 1) - n - 1) / n
        A = np.diag(t).astype(complex)
        V = np.fliplr(np.eye(n)).astype(complex)
        if phases is not None:
            phi = np.exp(1j * np.asarray(phases, dtype=float))
            if phi.shape != (n,):
                raise InvalidParameter('one phase per grid point is required', {'n': n})
            V = (phi[:, None] * V) * phi.conj()[None, :]
        gp = self.davis.symmetry_to_pair(A, V)
        return self.decomposition.validate_pair(gp.P0, gp.Q0)

    def fourier_pair(self, n: int, I: Sequence[int], J: Sequence[int]) -> ProjectionPair:
        """Indicator projection on I and its Fourier-conjugate indicator projection on J."""
        I, J = sorted(set(int(i) for i in I)), sorted(set(int(j) for j in J))
        for name, index in (('I', I), ('J', J)):
            if not index or index[0] < 0 or index[-1] >= n:
                raise InvalidParameter(f'{name} must be a nonempty subset of 0..{n - 1}', {name: index})
        F = scipy.linalg.dft(n, scale='sqrtn')
        P = np.diag(np.isin(np.arange(n), I).astype(complex))
        Q = adjoint(F) @ np.diag(np.isin(np.arange(n), J).astype(complex)) @ F
        return self.decomposition.validate_pair(P, Q)

    def omega_parametrization(self, A0) -> OmegaParametrization:
        """Pair each +lambda_k eigenvector with the -lambda_k eigenvector, ascending in lambda."""
        decomp = self.spectral.eigh(A0)
        w = decomp.eigenvalues
        positive = np.flatnonzero(w > 0)
        negative = np.flatnonzero(w < 0)[::-1]
        if positive.size != negative.size or positive.size + negative.size != w.size:
            raise DomainError('A0 is not a certified generic difference', {'eigenvalues': w.tolist()})
        lam = w[positive]
        if np.max(np.abs(lam + w[negative])) > self.tolerances.certify_tol * float(np.max(np.abs(w))):
            raise DomainError('spectrum of A0 is not symmetric', {'eigenvalues': w.tolist()})
        groups = self.spectral.clusters(lam)
        if any(len(group) > 1 for group in groups):
            raise DegenerateSpectrum(
                'A0 has repeated eigenvalues',
                {'multiplicities': [len(group) for group in groups]},
            )
        return OmegaParametrization(lam, decomp.columns(positive), decomp.columns(negative))

    def _gram(self, points: np.ndarray) -> np.ndarray:
        # G[i, j] = <k_{c_j}, k_{c_i}> = k_{c_j}(c_i)
        return 1.0 / (1.0 - np.conj(points)[None, :] * points[:, None])

    def blaschke_kernel_matrices(self, a: Sequence[complex], b: Sequence[complex]) -> Dict[str, np.ndarray]:
        """
        Gram matrix of k_{a_1..N}, k_{b_1..N} and the coordinates of P, Q, A0 in that basis.

        P and Q project onto B_a H^2 and B_b H^2. Products B k are expanded in
        the kernel basis by least squares on 4N + 1 points of the unit circle.
        """
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        b = np.atleast_1d(np.asarray(b, dtype=complex))
        N = a.size
        if N == 0 or b.size != N:
            raise InvalidParameter('a and b must be nonempty lists of equal length', {'a': N, 'b': b.size})
        points = np.concatenate([a, b])
        if np.any(np.abs(points) >= 1):
            raise InvalidParameter('points must lie in the open unit disk')
        if len(set(a.tolist())) != N or np.any(np.isclose(a[:, None], b[None, :], rtol=0, atol=1e-15)):
            raise InvalidParameter('a must be distinct and disjoint from b')

        G = self._gram(points)
        condition = float(np.linalg.cond(G))
        logger.debug('Blaschke Gram condition number %.3e', condition)
        if not np.isfinite(condition) or condition > MAX_GRAM_CONDITION:
            raise IllConditionedGram('kernel points too close', {'condition': condition})

        nodes = np.exp(2j * np.pi * (np.arange(4 * N + 1) + 0.5) / (4 * N + 1))
        K = np.stack([szego_kernel(c, nodes) for c in points], axis=1)

        def expand(values: np.ndarray) -> np.ndarray:
            coeffs, *_ = np.linalg.lstsq(K, values, rcond=None)
            residual = np.linalg.norm(K @ coeffs - values)
            if residual > 1e-8 * max(1.0, np.linalg.norm(values)):
                raise CertificationFailed('kernel expansion is inexact', {'residual': float(residual)})
            return coeffs

        Ba, Bb = blaschke(a, nodes), blaschke(b, nodes)
        MP = np.zeros((2 * N, 2 * N), dtype=complex)
        MQ = np.zeros((2 * N, 2 * N), dtype=complex)
        for i, point in enumerate(a):
            MQ[:, i] = expand(np.conj(blaschke(b, point)) * Bb * szego_kernel(point, nodes))
        for j, point in enumerate(b):
            MP[:, N + j] = expand(np.conj(blaschke(a, point)) * Ba * szego_kernel(point, nodes))
        return {'gram': G, 'P': MP, 'Q': MQ, 'A0': MP - MQ}

    def blaschke_compressions(self, a: Sequence[complex], b: Sequence[complex]) -> GenericPair:
        """P and Q restricted to the model space, in the Cholesky-orthonormalized kernel basis."""
        mats = self.blaschke_kernel_matrices(a, b)
        L = scipy.linalg.cholesky(mats['gram'], lower=True)

        def orthonormal(M: np.ndarray) -> np.ndarray:
            # L^* M L^{-*}
            right = adjoint(scipy.linalg.solve_triangular(L, adjoint(M), lower=True))
            return adjoint(L) @ right

        return GenericPair(hermitian_part(orthonormal(mats['P'])), hermitian_part(orthonormal(mats['Q'])))

    def blaschke_pair(self, a: Sequence[complex], b: Sequence[complex]) -> GenericPair:
        """
        Generic pair of the 2N-dimensional model space spanned by the kernels at a and b.

        Returns the witness pair over the orthonormalized A0, cross-checked
        against the compressions of the two Blaschke projections.
        """
        compressions = self.blaschke_compressions(a, b)
        A0 = hermitian_part(compressions.A0)
        m = A0.shape[0]
        split = self.decomposition.three_space_split(A0)
        if split.dims['generic'] != m:
            raise CertificationFailed('model space is not entirely generic', {'dims': split.dims})
        membership = self.decomposition.is_difference_of_projections(A0)
        if not membership['success']:
            raise CertificationFailed(membership['diagnostic'])
        witness = membership['witness']
        gp = GenericPair(witness.P, witness.Q)
        self.decomposition.certify_generic(gp)

        loose = 1e-6
        checks = {
            'compression_idempotent': max(
                self.spectral.operator_norm(compressions.P0 @ compressions.P0 - compressions.P0),
                self.spectral.operator_norm(compressions.Q0 @ compressions.Q0 - compressions.Q0),
            ),
            'sum_norm': abs(
                self.spectral.operator_norm(compressions.P0 + compressions.Q0)
                - self.spectral.operator_norm(gp.P0 + gp.Q0)
            ),
        }
        if any(value > loose for value in checks.values()):
            raise CertificationFailed('witness and Blaschke compressions disagree', checks)
        return gp

    def idempotent_pair(self, B, seed=None, samples: int = 8) -> Tuple[GenericPair, Dict[str, Any]]:
        """
        Range projections of E = [[1, B], [0, 0]] and of its adjoint.

        Args:
            B: Hermitian positive definite k x k matrix
            seed: seed for the commutant and isotropy samples
            samples: number of random commutant elements checked

        Returns:
            (GenericPair, report)
        """
        B = self.spectral.hermitian(B, 'B')
        decomp = self.spectral.eigh(B)
        scale = float(np.max(np.abs(decomp.eigenvalues)))
        if decomp.eigenvalues[0] <= self.tolerances.rank_tol * scale:
            raise NotPositive('B must be positive definite', {'min_eigenvalue': float(decomp.eigenvalues[0])})
        k = B.shape[0]
        I, O = np.eye(k), np.zeros((k, k))
        E = np.block([[I, B], [O, O]])
        S = E + adjoint(E) - np.eye(2 * k)
        P = adjoint(scipy.linalg.solve(S, adjoint(E), assume_a='her'))
        Q = adjoint(scipy.linalg.solve(S, E, assume_a='her'))
        gp = GenericPair(hermitian_part(P), hermitian_part(Q))

        R = np.linalg.inv(I + B @ B)
        closed_form = np.block([[B @ B @ R, -B @ R], [-B @ R, -B @ B @ R]])
        residual = self.spectral.operator_norm(gp.A0 - closed_form)
        if residual > self.tolerances.certify_tol:
            raise CertificationFailed('difference disagrees with the closed form', {'residual': residual})
        self.decomposition.certify_generic(gp)

        rng = np.random.default_rng(seed)
        U, groups = decomp.eigenvectors, self.spectral.clusters(decomp.eigenvalues)

        def commuting_with_B() -> np.ndarray:
            X = np.zeros((k, k), dtype=complex)
            for group in groups:
                d = len(group)
                X[np.ix_(group, group)] = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            return U @ X @ adjoint(U)

        worst = 0.0
        A0 = gp.A0
        for _ in range(samples):
            Yb, Zb = commuting_with_B(), commuting_with_B()
            X = np.block([[Yb, Zb], [Zb, Yb + 2.0 * B @ Zb]])
            worst = max(worst, self.spectral.operator_norm(X @ A0 - A0 @ X) / self.spectral.operator_norm(X))

        frame = self.decomposition.halmos_frame(gp)
        commutator = self.orbit.isotropy_commutator(frame, rng)
        report = {
            'success': worst <= self.tolerances.certify_tol,
            'closed_form_residual': residual,
            'commutant_samples': samples,
            'max_commutator_residual': worst,
            'isotropy_commutator': commutator,
            'isotropy_noncommutative': commutator > 1e-6,
        }
        return gp, report
