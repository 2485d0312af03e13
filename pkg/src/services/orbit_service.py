import logging
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.models.config import Tolerances
from src.models.errors import (
    CertificationFailed, DomainError, InconsistentReport, MismatchedDifference, NotInCommutant,
)
from src.models.orbit import CommutantElement, IsotropyElement
from src.models.pairs import GenericPair, HalmosFrame
from src.services.davis_service import DavisService
from src.services.decomposition_service import DecompositionService
from src.services.spectral_service import SpectralService, adjoint, hermitian_part

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.Generator, None]


class OrbitService:
    """Action of the unitary group of the commutant of A0 on its fiber of pairs."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances or Tolerances()
        self.spectral = SpectralService(self.tolerances)
        self.decomposition = DecompositionService(self.tolerances)
        self.davis = DavisService(self.tolerances)

    def check_same_difference(self, gp0: GenericPair, gp1: GenericPair) -> None:
        if gp0.m != gp1.m:
            raise MismatchedDifference('pairs live on spaces of different dimension', {'m0': gp0.m, 'm1': gp1.m})
        residual = self.spectral.operator_norm(gp0.A0 - gp1.A0)
        scale = max(1.0, self.spectral.operator_norm(gp0.A0))
        if residual > self.tolerances.certify_tol * scale:
            raise MismatchedDifference('pairs have different differences', {'residual': residual})

    def cluster_mask(self, frame: HalmosFrame) -> np.ndarray:
        """Boolean k x k mask of index pairs sharing an angle cluster."""
        mask = np.zeros((frame.half, frame.half), dtype=bool)
        for group in self.spectral.clusters(frame.gamma):
            mask[np.ix_(group, group)] = True
        return mask

    def commutant_membership(self, M, frame: HalmosFrame) -> CommutantElement:
        """
        Decompose M in Halmos coordinates and check it commutes with A0.

        Args:
            M: operator on the generic part
            frame: Halmos frame of the pair

        Returns:
            CommutantElement with blocks X, Y, Z
        """
        M = self.spectral.as_matrix(M, 'M')
        X, Y1, Y2, Z = frame.blocks(M)
        Gamma, C, S = np.diag(frame.gamma), np.diag(frame.C), np.diag(frame.S)
        Y = 0.5 * (Y1 + Y2)
        residuals = {
            'offdiagonal': self.spectral.operator_norm(Y1 - Y2),
            'gamma': max(self.spectral.operator_norm(B @ Gamma - Gamma @ B) for B in (X, Y, Z)),
            'relation': self.spectral.operator_norm(C @ (X - Z) + 2.0 * S @ Y),
        }
        tol = self.tolerances.certify_tol * max(self.spectral.operator_norm(M), np.finfo(float).tiny)
        violated = {key: value for key, value in residuals.items() if value > tol}
        if violated:
            raise NotInCommutant('operator does not commute with A0', {'residuals': violated})
        return CommutantElement(frame, X, Y, Z)

    def random_commutant_unitary(self, A0: np.ndarray, seed: Seed = None) -> np.ndarray:
        """Block-Haar unitary over the eigenvalue clusters of A0."""
        rng = np.random.default_rng(seed)
        decomp = self.spectral.eigh(A0)
        U = np.zeros((decomp.n, decomp.n), dtype=complex)
        for group in self.spectral.clusters(decomp.eigenvalues):
            basis = decomp.eigenvectors[:, group]
            U += basis @ self.spectral.haar_unitary(len(group), rng) @ adjoint(basis)
        return U

    def random_fiber_pair(self, gp: GenericPair, seed: Seed = None) -> GenericPair:
        return self.davis.conjugate_pair(self.random_commutant_unitary(gp.A0, seed), gp)

    def _certify_intertwiner(self, U: np.ndarray, gp0: GenericPair, gp1: GenericPair) -> None:
        A0, Ua = gp0.A0, adjoint(U)
        residuals = {
            'unitary': self.spectral.unitary_residual(U),
            'commutes': self.spectral.operator_norm(U @ A0 - A0 @ U),
            'P': self.spectral.operator_norm(U @ gp0.P0 @ Ua - gp1.P0),
            'Q': self.spectral.operator_norm(U @ gp0.Q0 @ Ua - gp1.Q0),
        }
        limits = {
            'unitary': 1e-10,
            'commutes': self.tolerances.certify_tol * self.spectral.operator_norm(A0),
            'P': 1e-8,
            'Q': 1e-8,
        }
        failed = {key: residuals[key] for key in residuals if residuals[key] > limits[key]}
        if failed:
            logger.warning('intertwiner certification failed: %s', failed)
            raise CertificationFailed('unitary does not carry gp0 to gp1', {'residuals': failed})

    def intertwining_unitary(self, gp0: GenericPair, gp1: GenericPair) -> np.ndarray:
        """
        Unitary U commuting with A0 with U (P0, Q0) U* = (P0', Q0').

        On K = N(P0 + Q0' - 1) U is the isometric part of A0; on the
        complement it is sgn(P0 + Q0' - 1) times the Davis symmetry of gp0.
        """
        self.check_same_difference(gp0, gp1)
        m = gp0.m
        M = hermitian_part(gp0.P0 + gp1.Q0 - np.eye(m))
        decomp = self.spectral.eigh(M)
        w = decomp.eigenvalues
        # ||P0 + Q0' - 1|| <= 1
        threshold = self.tolerances.rank_tol
        kernel = np.abs(w) <= threshold
        K, Kp = decomp.columns(kernel), decomp.columns(~kernel)
        logger.debug('intertwiner: dim K = %d of %d', K.shape[1], m)

        U = np.zeros((m, m), dtype=complex)
        if Kp.shape[1]:
            sigma = (Kp * np.sign(w[~kernel])) @ adjoint(Kp)
            V = self.davis.pair_to_symmetry(gp0).V
            Pi = self.spectral.projector(Kp)
            U += sigma @ Pi @ V @ Pi
        if K.shape[1]:
            U += K @ self.spectral.sign(adjoint(K) @ gp0.A0 @ K) @ adjoint(K)
        self._certify_intertwiner(U, gp0, gp1)
        return U

    def local_cross_section(self, gp0: GenericPair, gp1: GenericPair) -> np.ndarray:
        """U = sgn(P0 + Q0' - 1) V; continuous in gp1 where the sum stays invertible."""
        self.check_same_difference(gp0, gp1)
        # contraction: the gap is absolute
        sigma = self.spectral.sign(gp0.P0 + gp1.Q0 - np.eye(gp0.m), scale_floor=1.0)
        U = sigma @ self.davis.pair_to_symmetry(gp0).V
        self._certify_intertwiner(U, gp0, gp1)
        return U

    def conditional_expectation(self, M, gp: GenericPair, frame: Optional[HalmosFrame] = None) -> np.ndarray:
        """
        Expectation of the commutant onto the isotropy algebra of gp.

        Args:
            M: element of the commutant of A0
            gp: base pair
            frame: Halmos frame of gp (computed when omitted)

        Returns:
            (1/2) P0 (M + WMW) P0 + (1/2) P0^perp (M + WMW) P0^perp with W = sgn(K)
        """
        frame = frame or self.decomposition.halmos_frame(gp)
        M = self.commutant_membership(M, frame).ambient()
        I = np.eye(gp.m)
        P0, Q0 = gp.P0, gp.Q0
        Pp = I - P0
        K = Q0 - P0 @ Q0 @ P0 - Pp @ Q0 @ Pp
        W = self.spectral.sign(K)
        N = M + W @ M @ W
        return 0.5 * (P0 @ N @ P0 + Pp @ N @ Pp)

    def isotropy_sample(self, frame: HalmosFrame, seed: Seed = None) -> IsotropyElement:
        rng = np.random.default_rng(seed)
        Wp = np.zeros((frame.half, frame.half), dtype=complex)
        for group in self.spectral.clusters(frame.gamma):
            Wp[np.ix_(group, group)] = self.spectral.haar_unitary(len(group), rng)
        return IsotropyElement(frame, Wp)

    def isotropy_commutator(self, frame: HalmosFrame, seed: Seed = None) -> float:
        """Commutator norm of two independent isotropy samples."""
        rng = np.random.default_rng(seed)
        B1 = self.isotropy_sample(frame, rng).ambient()
        B2 = self.isotropy_sample(frame, rng).ambient()
        return self.spectral.operator_norm(B1 @ B2 - B2 @ B1)

    def fixes_pair(self, U: np.ndarray, gp: GenericPair) -> bool:
        tol = self.tolerances.certify_tol
        return (
            self.spectral.operator_norm(U @ gp.P0 - gp.P0 @ U) <= tol
            and self.spectral.operator_norm(U @ gp.Q0 - gp.Q0 @ U) <= tol
        )

    def closed_range_report(self, A, threshold: Optional[float] = None) -> Dict[str, Any]:
        """
        Closed-range diagnostics of a difference of projections.

        Two groups of conditions are evaluated; within each group the
        conditions are equivalent and must agree away from the threshold.
        'angles_from_zero': min angle and the gap of P0Q0P0 - P0 on R(P0).
        'angles_from_right': gaps of P0 + Q0 - 1 and of A0^2 - 1.
        """
        t = self.tolerances.rank_tol if threshold is None else float(threshold)
        membership = self.decomposition.is_difference_of_projections(A)
        if not membership['success']:
            raise DomainError('A is not a difference of projections', {'diagnostic': membership['diagnostic']})
        pair = membership['witness']
        split = self.decomposition.three_space_split(pair.A)
        if split.dims['generic'] == 0:
            return {
                'success': True,
                'closed': True,
                'threshold': t,
                'generic_dim': 0,
                'conditions': {},
                'note': 'no generic part',
            }

        gp = self.decomposition.generic_part(pair)
        frame = self.decomposition.halmos_frame(gp)
        m = gp.m
        P0, Q0, A0 = gp.P0, gp.Q0, gp.A0
        d = self.spectral.eigh(P0)
        E = d.columns(d.eigenvalues > 0.5)

        def smallest(M: np.ndarray) -> float:
            return float(np.min(np.abs(self.spectral.eigh(M).eigenvalues)))

        values = {
            'gamma_min': float(np.min(frame.gamma)),
            'compression_gap': smallest(adjoint(E) @ (P0 @ Q0 @ P0 - P0) @ E),
            'sum_gap': smallest(P0 + Q0 - np.eye(m)),
            'contraction_gap': smallest(A0 @ A0 - np.eye(m)),
        }
        angles = {
            'gamma_min': values['gamma_min'],
            'compression_gap': float(np.arcsin(np.sqrt(min(values['compression_gap'], 1.0)))),
            'sum_gap': float(np.arcsin(min(values['sum_gap'], 1.0))),
            'contraction_gap': float(np.arcsin(np.sqrt(min(values['contraction_gap'], 1.0)))),
        }
        conditions = {
            name: {'value': values[name], 'equivalent_angle': angles[name], 'passed': angles[name] > t}
            for name in values
        }
        groups = {
            'angles_from_zero': ('gamma_min', 'compression_gap'),
            'angles_from_right': ('sum_gap', 'contraction_gap'),
        }
        band = 1e-6 * t + self.tolerances.rank_tol
        for group, names in groups.items():
            flags = {conditions[name]['passed'] for name in names}
            near = any(abs(angles[name] - t) <= band for name in names)
            if len(flags) > 1 and not near:
                raise InconsistentReport(
                    f'closed-range conditions disagree in {group}',
                    {name: conditions[name] for name in names},
                )
        closed = all(c['passed'] for c in conditions.values())
        return {
            'success': True,
            'closed': closed,
            'threshold': t,
            'generic_dim': m,
            'conditions': conditions,
            'groups': {
                group: all(conditions[name]['passed'] for name in names)
                for group, names in groups.items()
            },
        }

    def sum_norm_invariance(self, gp0: GenericPair, gp1: GenericPair) -> Tuple[float, float]:
        self.check_same_difference(gp0, gp1)
        return (
            self.spectral.operator_norm(gp0.P0 + gp0.Q0),
            self.spectral.operator_norm(gp1.P0 + gp1.Q0),
        )
