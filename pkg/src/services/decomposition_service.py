import logging
from typing import Any, Dict, Optional

import numpy as np
import scipy.linalg

from src.models.config import Tolerances
from src.models.errors import (
    CertificationFailed, DegenerateAngle, EmptyGenericPart, MalformedMatrix,
    NotAContraction, NotAProjection, NotHermitian,
)
from src.models.pairs import GenericPair, HalmosFrame, ProjectionPair, ThreeSpaceSplit
from src.services.davis_service import DavisService
from src.services.spectral_service import SpectralService, adjoint, hermitian_part

logger = logging.getLogger(__name__)


class DecompositionService:
    """Three-space split, generic part, Halmos frame and membership in the difference class."""

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances or Tolerances()
        self.spectral = SpectralService(self.tolerances)
        self.davis = DavisService(self.tolerances)

    def validate_pair(self, P, Q) -> ProjectionPair:
        """
        Certify two matrices as orthogonal projections of the same size.

        Args:
            P: candidate projection
            Q: candidate projection

        Returns:
            ProjectionPair with both matrices symmetrized
        """
        P = self.spectral.as_matrix(P, 'P')
        Q = self.spectral.as_matrix(Q, 'Q')
        if P.shape != Q.shape:
            raise MalformedMatrix('P and Q have different sizes', {'P': list(P.shape), 'Q': list(Q.shape)})
        tol = self.tolerances.projection_tol
        for name, M in (('P', P), ('Q', Q)):
            scale = max(1.0, self.spectral.operator_norm(M))
            self_adjoint = self.spectral.operator_norm(M - adjoint(M))
            if self_adjoint > tol * scale:
                raise NotAProjection(
                    f'{name} is not self-adjoint',
                    {'matrix': name, 'property': 'self-adjoint', 'residual': self_adjoint},
                )
            idempotent = self.spectral.operator_norm(M @ M - M)
            if idempotent > tol * scale:
                raise NotAProjection(
                    f'{name} is not idempotent',
                    {'matrix': name, 'property': 'idempotent', 'residual': idempotent},
                )
        return ProjectionPair(hermitian_part(P), hermitian_part(Q))

    def three_space_split(self, A) -> ThreeSpaceSplit:
        A = self.spectral.hermitian(A, 'A')
        tol = self.tolerances.rank_tol
        norm = self.spectral.operator_norm(A)
        if norm > 1.0 + tol:
            raise NotAContraction(f'||A|| = {norm!r} exceeds 1', {'norm': norm})
        decomp = self.spectral.eigh(A)
        w = decomp.eigenvalues
        null = np.abs(w) <= tol
        generic = ~null & (np.abs(w ** 2 - 1.0) > tol)
        unit = ~null & ~generic
        return ThreeSpaceSplit(
            basis_nullA=decomp.columns(null),
            basis_plus1=decomp.columns(unit & (w > 0)),
            basis_minus1=decomp.columns(unit & (w < 0)),
            basis_generic=decomp.columns(generic),
        )

    def generic_part(self, pair: ProjectionPair) -> GenericPair:
        split = self.three_space_split(pair.A)
        G = split.basis_generic
        if G.shape[1] == 0:
            raise EmptyGenericPart('the pair has no generic part', {'dims': split.dims})

        # N(A) = R(P)∩R(Q) + N(P)∩N(Q), N(A-1) = R(P)∩N(Q), N(A+1) = N(P)∩R(Q);
        # a unit eigenvalue accepted at rank_tol moves vectors by at most sqrt(rank_tol)
        P, Q = pair.P, pair.Q
        Bn, Bp, Bm = split.basis_nullA, split.basis_plus1, split.basis_minus1
        norm = self.spectral.operator_norm
        observed = {
            'nullA': max(norm(P @ Bn - Bn @ (adjoint(Bn) @ P @ Bn)), norm(P @ Bn - Q @ Bn)),
            'plus1': max(norm(P @ Bp - Bp), norm(Q @ Bp)),
            'minus1': max(norm(P @ Bm), norm(Q @ Bm - Bm)),
        }
        limit = np.sqrt(self.tolerances.rank_tol) + self.tolerances.certify_tol
        failed = {key: value for key, value in observed.items() if value > limit}
        if failed:
            logger.warning('split cross-check failed: %s', failed)
            raise CertificationFailed(
                'split subspaces disagree with the range intersections',
                {'split': split.dims, 'residuals': failed},
            )

        P0 = hermitian_part(adjoint(G) @ P @ G)
        Q0 = hermitian_part(adjoint(G) @ Q @ G)
        gp = GenericPair(P0, Q0)
        self.certify_generic(gp)
        reduction = max(
            self.spectral.operator_norm(P @ G - G @ P0),
            self.spectral.operator_norm(Q @ G - G @ Q0),
        )
        if reduction > self.tolerances.certify_tol:
            raise CertificationFailed('generic part does not reduce the pair', {'residual': reduction})
        return gp

    def certify_generic(self, gp: GenericPair) -> None:
        """Raise unless gp has even dimension, projection compressions and a certified spectrum."""
        if gp.m % 2:
            raise CertificationFailed('generic part has odd dimension', {'m': gp.m})
        tol = self.tolerances.certify_tol
        for name, M in (('P0', gp.P0), ('Q0', gp.Q0)):
            residual = self.spectral.operator_norm(M @ M - M)
            if residual > tol:
                raise CertificationFailed(f'{name} is not a projection', {'matrix': name, 'residual': residual})
        w = self.spectral.eigh(gp.A0).eigenvalues
        rank_tol = self.tolerances.rank_tol
        if np.any(np.abs(w) <= rank_tol) or np.any(np.abs(w ** 2 - 1.0) <= rank_tol):
            raise CertificationFailed('A0 has eigenvalues at 0 or +-1', {'eigenvalues': w.tolist()})

    def halmos_frame(self, gp: GenericPair) -> HalmosFrame:
        """
        Canonical frame of a generic pair.

        Diagonalizes the compression of Q0 to R(P0); the second copy of L is
        the normalized image of the first under (1 - P0) Q0. Angles come out
        in ascending order.
        """
        m = gp.m
        if m == 0 or m % 2:
            raise CertificationFailed('generic part must have positive even dimension', {'m': m})
        k = m // 2
        P0, Q0 = gp.P0, gp.Q0
        d = self.spectral.eigh(P0)
        E = d.columns(d.eigenvalues > 0.5)
        if E.shape[1] != k:
            raise CertificationFailed('R(P0) is not half of the generic part', {'rank': E.shape[1], 'm': m})

        compression = self.spectral.eigh(adjoint(E) @ Q0 @ E)
        order = np.argsort(-compression.eigenvalues, kind='stable')
        c2 = compression.eigenvalues[order]
        F1 = E @ compression.eigenvectors[:, order]

        cross = (np.eye(m) - P0) @ Q0 @ F1
        cs = np.linalg.norm(cross, axis=0)
        gamma = 0.5 * np.arctan2(2.0 * cs, 2.0 * c2 - 1.0)
        tol = self.tolerances.rank_tol
        if np.any(gamma <= tol) or np.any(gamma >= np.pi / 2 - tol) or np.any(cs == 0):
            raise DegenerateAngle('principal angle at 0 or pi/2', {'gamma': gamma.tolist()})

        F2 = cross / cs
        if self.spectral.operator_norm(adjoint(F2) @ F2 - np.eye(k)) > 1e-12:
            F2, _ = scipy.linalg.polar(F2)
        W = adjoint(np.hstack([F1, F2]))
        frame = HalmosFrame(W, gamma)

        P_model, Q_model = frame.model_pair()
        residual = max(
            self.spectral.operator_norm(frame.to_frame(P0) - P_model),
            self.spectral.operator_norm(frame.to_frame(Q0) - Q_model),
        )
        if residual > self.tolerances.certify_tol:
            logger.warning('Halmos frame residual %r', residual)
            raise CertificationFailed('Halmos frame does not reproduce the pair', {'residual': residual})
        return frame

    def is_difference_of_projections(self, A) -> Dict[str, Any]:
        """
        Decide whether A = P - Q for orthogonal projections P, Q.

        Args:
            A: candidate difference

        Returns:
            Dictionary with 'success', a 'witness' ProjectionPair when true and a 'diagnostic'
        """
        try:
            A = self.spectral.hermitian(A, 'A')
            split = self.three_space_split(A)
        except (NotHermitian, NotAContraction, MalformedMatrix) as e:
            return {'success': False, 'witness': None, 'diagnostic': e.message}

        G = split.basis_generic
        n = A.shape[0]
        P = self.spectral.projector(split.basis_plus1)
        Q = self.spectral.projector(split.basis_minus1)
        if G.shape[1]:
            A0 = hermitian_part(adjoint(G) @ A @ G)
            decomp = self.spectral.eigh(A0)
            w = decomp.eigenvalues
            positive = np.flatnonzero(w > 0)
            negative = np.flatnonzero(w < 0)[::-1]
            if positive.size != negative.size:
                return {
                    'success': False,
                    'witness': None,
                    'diagnostic': f'generic spectrum has {positive.size} positive and {negative.size} negative eigenvalues',
                }
            mismatch = float(np.max(np.abs(w[positive] + w[negative])))
            if mismatch > self.tolerances.certify_tol * float(np.max(np.abs(w))):
                return {
                    'success': False,
                    'witness': None,
                    'diagnostic': f'generic spectrum is not symmetric (mismatch {mismatch!r})',
                }
            e = decomp.eigenvectors[:, positive]
            f = decomp.eigenvectors[:, negative]
            V = f @ adjoint(e) + e @ adjoint(f)
            gp = self.davis.symmetry_to_pair(A0, V)
            P = P + G @ gp.P0 @ adjoint(G)
            Q = Q + G @ gp.Q0 @ adjoint(G)
        witness = ProjectionPair(hermitian_part(P), hermitian_part(Q))
        residual = self.spectral.operator_norm(witness.A - A) if n else 0.0
        return {
            'success': True,
            'witness': witness,
            'diagnostic': f'witness pair reproduces A within {residual:.3e}',
        }

    def friedrichs_cos(self, pair: ProjectionPair) -> float:
        """||PQ - P_{R(P) cap R(Q)}||, the cosine of the Friedrichs angle."""
        I = np.eye(pair.n)
        meet = self.spectral.nullspace_basis((I - pair.P) + (I - pair.Q))
        return self.spectral.operator_norm(pair.P @ pair.Q - self.spectral.projector(meet))

    def principal_angles(self, pair: ProjectionPair) -> np.ndarray:
        """Principal angles between R(P) and R(Q), ascending."""
        dp, dq = self.spectral.eigh(pair.P), self.spectral.eigh(pair.Q)
        RP = dp.columns(dp.eigenvalues > 0.5)
        RQ = dq.columns(dq.eigenvalues > 0.5)
        if RP.shape[1] == 0 or RQ.shape[1] == 0:
            return np.zeros(0)
        return np.sort(scipy.linalg.subspace_angles(RP, RQ))

    def kato_residual(self, pair: ProjectionPair) -> float:
        """Residual of (P - Q)^2 + (P + Q - 1)^2 = 1."""
        I = np.eye(pair.n)
        D, S = pair.P - pair.Q, pair.P + pair.Q - I
        return self.spectral.operator_norm(D @ D + S @ S - I)

    def is_symmetry_difference(self, pair: ProjectionPair) -> bool:
        """True when A = P - Q is itself a symmetry, i.e. the fiber is a single pair."""
        split = self.three_space_split(pair.A)
        dims = split.dims
        return dims['nullA'] == 0 and dims['generic'] == 0
