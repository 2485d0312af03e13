import csv
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.models.config import Tolerances
from src.models.errors import BranchCut, CertificateFailed, CertificationFailed, DomainError, NotCommutingWithGamma
from src.models.geodesic import Geodesic, HorizontalTangent
from src.models.pairs import GenericPair, HalmosFrame
from src.services.davis_service import DavisService
from src.services.decomposition_service import DecompositionService
from src.services.orbit_service import OrbitService
from src.services.spectral_service import SpectralService, adjoint, anti_hermitian_part, hermitian_part

logger = logging.getLogger(__name__)


class GeodesicService:
    """Horizontal tangents, exponential and logarithm maps, Finsler distance."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances or Tolerances()
        self.spectral = SpectralService(self.tolerances)
        self.decomposition = DecompositionService(self.tolerances)
        self.davis = DavisService(self.tolerances)
        self.orbit = OrbitService(self.tolerances)

    def horizontal_from_block(self, Y, frame: HalmosFrame) -> HorizontalTangent:
        """
        Horizontal tangent with off-diagonal block Y.

        Args:
            Y: anti-Hermitian k x k block commuting with the angle operator
            frame: Halmos frame of the base pair

        Returns:
            HorizontalTangent
        """
        Y = np.asarray(Y, dtype=complex).reshape(frame.half, frame.half)
        scale = max(self.spectral.operator_norm(Y), np.finfo(float).tiny)
        tol = self.tolerances.certify_tol * scale
        skew = self.spectral.operator_norm(Y + adjoint(Y))
        if skew > tol:
            raise DomainError('Y is not anti-Hermitian', {'residual': skew})
        Gamma = np.diag(frame.gamma)
        commutator = self.spectral.operator_norm(Y @ Gamma - Gamma @ Y)
        if commutator > tol * max(1.0, float(np.max(frame.gamma))):
            raise NotCommutingWithGamma('Y does not commute with the angle operator', {'residual': commutator})
        ht = HorizontalTangent(frame, anti_hermitian_part(Y))
        self._certify_horizontal(ht)
        return ht

    def _certify_horizontal(self, ht: HorizontalTangent) -> None:
        """Residuals of the horizontal-tangent invariants, all in frame coordinates."""
        norm = self.spectral.operator_norm
        frame, k = ht.frame, ht.frame.half
        Zf = ht.Z_frame
        X, Y1, Y2, Zb = Zf[:k, :k], Zf[:k, k:], Zf[k:, :k], Zf[k:, k:]
        P_model, Q_model = frame.model_pair()
        A_model = P_model - Q_model
        J = np.block([[np.zeros((k, k)), np.eye(k)], [-np.eye(k), np.zeros((k, k))]])
        blocks = (X, Y1, Y2, Zb)
        residuals = {
            'anti_hermitian': norm(Zf + adjoint(Zf)),
            'commutes_with_A0': norm(Zf @ A_model - A_model @ Zf),
            # E(M) = (1/2) diag(X + Z, X + Z) in the frame
            'expectation': 0.5 * norm(X + Zb),
            'blocks_commute': max(norm(B1 @ B2 - B2 @ B1) for B1 in blocks for B2 in blocks),
            'symmetric_spectrum': norm(J @ Zf @ adjoint(J) + Zf),
        }
        scale = max(1.0, norm(Zf))
        limits = {key: self.tolerances.certify_tol * scale for key in residuals}
        limits['blocks_commute'] = self.tolerances.certify_tol * scale ** 2
        failed = {key: value for key, value in residuals.items() if value > limits[key]}
        if failed:
            logger.warning('horizontal tangent certification failed: %s', failed)
            raise CertificationFailed('tangent is not horizontal', {'residuals': failed})

    def finsler_norm(self, ht: HorizontalTangent) -> float:
        norm = self.spectral.operator_norm(ht.Y_over_C)
        ambient = self.spectral.operator_norm(ht.Z)
        if abs(norm - ambient) > self.tolerances.certify_tol * max(1.0, norm):
            raise CertificationFailed(
                'Finsler norm disagrees with the operator norm of Z',
                {'block': norm, 'ambient': ambient},
            )
        return norm

    def _cosh_sinh(self, G: np.ndarray):
        """cosh and sinh of an anti-Hermitian G through cos and sin of the Hermitian -iG."""
        H = self.spectral.hermitian(-1j * G, 'iG')
        return self.spectral.matrix_function(H, np.cos), 1j * self.spectral.matrix_function(H, np.sin)

    def exp_unitary_intrinsic(self, ht: HorizontalTangent, t: float, J0: Optional[np.ndarray] = None) -> np.ndarray:
        """e^{tZ} = cosh(t Z J0) + sinh(t Z J0) J0, with Z J0 = J0 Z."""
        if J0 is None:
            P_model, Q_model = ht.frame.model_pair()
            J0 = self.davis.j0(ht.frame.from_frame(P_model - Q_model))
        ch, sh = self._cosh_sinh(t * ht.Z @ J0)
        return ch + sh @ J0

    def exp_unitary_closed_form(self, ht: HorizontalTangent, t: float) -> np.ndarray:
        """
        e^{tZ} = cosh(t Y C^-1) I + sinh(t Y C^-1) Sigma in frame coordinates.

        The intrinsic evaluation is computed alongside and must agree.
        """
        frame = ht.frame
        k = frame.half
        ch, sh = self._cosh_sinh(t * ht.Y_over_C)
        O = np.zeros((k, k), dtype=complex)
        U_frame = HalmosFrame.assemble(ch, O, O, ch) + HalmosFrame.assemble(sh, O, O, sh) @ frame.sigma()
        U = frame.from_frame(U_frame)
        intrinsic = self.exp_unitary_intrinsic(ht, t)
        residual = self.spectral.operator_norm(U - intrinsic)
        if residual > self.tolerances.certify_tol:
            logger.warning('closed forms disagree: %r', residual)
            raise CertificationFailed('closed-form and intrinsic exponentials disagree', {'residual': residual})
        return U

    def exp_pair(self, base: GenericPair, ht: HorizontalTangent, t: float) -> GenericPair:
        U = self.exp_unitary_closed_form(ht, t)
        moved = self.davis.conjugate_pair(U, base)
        drift = self.spectral.operator_norm(moved.A0 - base.A0)
        if drift > self.tolerances.certify_tol * max(1.0, self.spectral.operator_norm(base.A0)):
            raise CertificationFailed('geodesic left the fiber of A0', {'residual': drift})
        return moved

    def _horizontal_projection(self, Z: np.ndarray, frame: HalmosFrame) -> HorizontalTangent:
        _, Y1, Y2, _ = frame.blocks(Z)
        Y = anti_hermitian_part(0.5 * (Y1 + Y2)) * self.orbit.cluster_mask(frame)
        return self.horizontal_from_block(Y, frame)

    def _global_exponent(self, V0: np.ndarray, V: np.ndarray, A0: np.ndarray) -> np.ndarray:
        """
        Exponent over the joint eigenspaces of V0 and V.

        Zero where V = V0, i(pi/2) J0 where V = -V0, and log(S V0) with
        S = sgn((V0 + V)/2) on the remaining part.
        """
        m = V0.shape[0]
        I = np.eye(m)
        nullspace = self.spectral.nullspace_basis
        h_pp = nullspace((I - V0) + (I - V))
        h_mm = nullspace((I + V0) + (I + V))
        h_pm = nullspace((I - V0) + (I + V))
        h_mp = nullspace((I + V0) + (I - V))
        flipped = np.hstack([h_pm, h_mp])
        covered = np.hstack([h_pp, h_mm, flipped])
        decomp = self.spectral.eigh(self.spectral.projector(covered))
        rest = decomp.columns(decomp.eigenvalues < 0.5)
        logger.debug(
            'global exponent: fixed %d, flipped %d, rest %d',
            h_pp.shape[1] + h_mm.shape[1], flipped.shape[1], rest.shape[1],
        )

        Z = np.zeros((m, m), dtype=complex)
        if flipped.shape[1]:
            J0 = self.davis.j0(A0)
            Z += flipped @ (0.5j * np.pi * (adjoint(flipped) @ J0 @ flipped)) @ adjoint(flipped)
        if rest.shape[1]:
            V0r = hermitian_part(adjoint(rest) @ V0 @ rest)
            Vr = hermitian_part(adjoint(rest) @ V @ rest)
            S = self.spectral.sign(0.5 * (V0r + Vr))
            Z += rest @ self.spectral.unitary_log(S @ V0r) @ adjoint(rest)
        return Z

    def log_pair(
        self,
        base: GenericPair,
        target: GenericPair,
        frame: Optional[HalmosFrame] = None,
        branch: Optional[str] = None,
    ) -> HorizontalTangent:
        """
        Horizontal Z with ||Z|| <= pi/2 and exp(Z) . base = target.

        Args:
            base: starting pair
            target: pair in the same fiber
            frame: Halmos frame of base (computed when omitted)
            branch: force 'A' (half logarithm of V V0) or 'B' (eigenspace splitting)

        Returns:
            HorizontalTangent in the frame of base
        """
        self.orbit.check_same_difference(base, target)
        frame = frame or self.decomposition.halmos_frame(base)
        V0 = self.davis.pair_to_symmetry(base).V
        V = self.davis.pair_to_symmetry(target).V
        phases, _ = self.spectral.unitary_phases(V @ V0)
        if branch is None:
            top = float(np.max(np.abs(phases))) if phases.size else 0.0
            branch = 'A' if top < np.pi - self.tolerances.branch_margin else 'B'
        if branch not in ('A', 'B'):
            raise DomainError(f'unknown branch {branch!r}')

        Z = None
        if branch == 'A':
            try:
                Z = 0.5 * self.spectral.unitary_log(V @ V0)
            except BranchCut:
                logger.debug('branch cut hit, falling back to eigenspace splitting')
                branch = 'B'
        if Z is None:
            Z = self._global_exponent(V0, V, base.A0)
        logger.debug('log_pair used branch %s', branch)

        ht = self._horizontal_projection(Z, frame)
        norm = self.finsler_norm(ht)
        if norm > np.pi / 2 + self.tolerances.certify_tol:
            raise CertificationFailed('logarithm exceeds the injectivity radius', {'norm': norm})
        end = self.exp_pair(base, ht, 1.0)
        miss = max(
            self.spectral.operator_norm(end.P0 - target.P0),
            self.spectral.operator_norm(end.Q0 - target.Q0),
        )
        if miss > self.tolerances.endpoint_tol:
            raise CertificationFailed('geodesic misses the target', {'residual': miss, 'branch': branch})
        return ht

    def geodesic_distance(self, base: GenericPair, target: GenericPair) -> float:
        return self.finsler_norm(self.log_pair(base, target))

    def geodesic(self, base: GenericPair, target: GenericPair) -> Geodesic:
        """Minimal geodesic joining two pairs of the same fiber."""
        ht = self.log_pair(base, target)
        return Geodesic(base, ht, self.finsler_norm(ht))

    def sample_path(self, geodesic: Geodesic, steps: int) -> List[Dict[str, Any]]:
        steps = max(int(steps), 1)
        samples = []
        for i in range(steps + 1):
            t = i / steps
            pair = self.exp_pair(geodesic.base, geodesic.tangent, t)
            samples.append({'t': t, 'P': pair.P0, 'Q': pair.Q0, 'distance': t * geodesic.length_per_unit_t})
        return samples

    def export_csv(self, geodesic: Geodesic, steps: int, path: Union[str, Path]) -> Path:
        """Write t, vectorized P(t) and Q(t) entries and the distance from the base."""
        path = Path(path)
        m = geodesic.base.m
        header = ['t']
        for name in ('P', 'Q'):
            for i in range(m):
                for j in range(m):
                    header += [f'{name}_{i}_{j}_re', f'{name}_{i}_{j}_im']
        header.append('distance')
        with path.open('w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for sample in self.sample_path(geodesic, steps):
                row = [format(sample['t'], '.17g')]
                for M in (sample['P'], sample['Q']):
                    for z in M.ravel():
                        row += [format(float(z.real), '.17g'), format(float(z.imag), '.17g')]
                row.append(format(sample['distance'], '.17g'))
                writer.writerow(row)
        return path

    def isotropy_direction(self, frame: HalmosFrame, Dp: np.ndarray) -> np.ndarray:
        """Ambient diag(Dp, Dp)."""
        O = np.zeros_like(Dp)
        return frame.from_frame(HalmosFrame.assemble(Dp, O, O, Dp))

    def lifting_margin(self, ht: HorizontalTangent, Dp) -> float:
        """||Z + D|| - ||Z|| for the isotropy direction D = diag(Dp, Dp)."""
        Dp = np.asarray(Dp, dtype=complex).reshape(ht.frame.half, ht.frame.half)
        Z = ht.Z
        return self.spectral.operator_norm(Z + self.isotropy_direction(ht.frame, Dp)) - self.spectral.operator_norm(Z)

    def _random_isotropy_algebra(self, rng: np.random.Generator, mask: np.ndarray, size: float) -> np.ndarray:
        k = mask.shape[0]
        G = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        Dp = anti_hermitian_part(G) * mask
        norm = self.spectral.operator_norm(Dp)
        return Dp if norm == 0 else Dp * (size * rng.uniform(0.01, 2.0) / norm)

    def minimality_certificate(
        self, ht: HorizontalTangent, trials: int = 200, seed: int = 0, iterations: int = 100
    ) -> Dict[str, Any]:
        """
        Sampled certificate that Z is a minimal lifting.

        Args:
            ht: horizontal tangent
            trials: number of random isotropy directions
            seed: root seed; every trial gets its own derived stream
            iterations: projected subgradient steps of the descent attempt

        Returns:
            Report dictionary with the tightest margins found
        """
        frame = ht.frame
        mask = self.orbit.cluster_mask(frame)
        Z = ht.Z
        norm = self.spectral.operator_norm(Z)
        size = max(norm, 1.0)
        floor = -self.tolerances.certify_tol

        def check(Dp: np.ndarray, source: str) -> float:
            margin = self.spectral.operator_norm(Z + self.isotropy_direction(frame, Dp)) - norm
            if margin < floor:
                raise CertificateFailed(
                    f'isotropy direction shortens Z ({source})',
                    {'margin': margin, 'Dp_norm': self.spectral.operator_norm(Dp)},
                )
            return margin

        streams = np.random.SeedSequence(seed).spawn(trials + 1)
        margins = [
            check(self._random_isotropy_algebra(np.random.default_rng(s), mask, size), 'sample')
            for s in streams[:trials]
        ]

        Dp = self._random_isotropy_algebra(np.random.default_rng(streams[-1]), mask, size)
        best = check(Dp, 'descent')
        for k in range(1, iterations + 1):
            u, _, vh = np.linalg.svd(Z + self.isotropy_direction(frame, Dp))
            g = np.outer(u[:, 0], vh[0])
            G11, _, _, G22 = frame.blocks(g)
            step = anti_hermitian_part(0.5 * (G11 + G22)) * mask
            length = self.spectral.operator_norm(step)
            if length == 0:
                break
            Dp = Dp - (size / k) * step / length
            best = min(best, check(Dp, 'descent'))

        return {
            'success': True,
            'certified': True,
            'trials': trials,
            'norm': norm,
            'min_margin': float(min(margins)) if margins else None,
            'descent_margin': float(best),
            'descent_iterations': iterations,
        }
