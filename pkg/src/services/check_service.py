import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.models.config import Tolerances
from src.models.errors import InvariantFailure
from src.models.geodesic import HorizontalTangent
from src.models.pairs import GenericPair, HalmosFrame, ProjectionPair
from src.services.davis_service import DavisService
from src.services.decomposition_service import DecompositionService
from src.services.geodesic_service import GeodesicService
from src.services.orbit_service import OrbitService
from src.services.spectral_service import SpectralService, adjoint, anti_hermitian_part

logger = logging.getLogger(__name__)

KATO_TOL = 1e-10
ROUND_TRIP_TOL = 1e-9
FRIEDRICHS_TOL = 1e-8
CONJUGATION_TOL = 1e-8
SUM_NORM_TOL = 1e-8
STRADDLE_TOL = 1e-8
EXPM_TOL = 1e-9
LOG_EXP_TOL = 1e-8
METRIC_TOL = 1e-8
TRIANGLE_TOL = 1e-7
RADIUS_MARGIN = 0.05


@dataclass
class CheckResult:
    name: str
    residual: Optional[float]
    tolerance: float
    passed: bool
    comparison: str = '<='
    message: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def at_most(cls, name: str, residual: float, tolerance: float, **details) -> 'CheckResult':
        residual = float(residual)
        return cls(name, residual, tolerance, residual <= tolerance, details=details)

    @classmethod
    def at_least(cls, name: str, value: float, tolerance: float, **details) -> 'CheckResult':
        value = float(value)
        return cls(name, value, tolerance, value >= tolerance, comparison='>=', details=details)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if data['message'] is None:
            del data['message']
        if not data['details']:
            del data['details']
        return data


class CheckService:
    """Invariant battery over one projection pair.

    Every check is deterministic given the seed: each one draws from its own
    stream spawned off ``SeedSequence(seed)``.
    """

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances or Tolerances()
        self.spectral = SpectralService(self.tolerances)
        self.decomposition = DecompositionService(self.tolerances)
        self.davis = DavisService(self.tolerances)
        self.orbit = OrbitService(self.tolerances)
        self.geodesics = GeodesicService(self.tolerances)

    def random_tangent(self, frame: HalmosFrame, rng: np.random.Generator, length: float) -> HorizontalTangent:
        """Random horizontal tangent with Finsler norm ``length``."""
        k = frame.half
        G = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        Y = anti_hermitian_part(G) * self.orbit.cluster_mask(frame)
        norm = self.spectral.operator_norm(Y / frame.C)
        if norm == 0:
            Y = 1j * np.eye(k)
            norm = self.spectral.operator_norm(Y / frame.C)
        return self.geodesics.horizontal_from_block(Y * (length / norm), frame)

    def run(self, pair: ProjectionPair, trials: int = 5, seed: int = 0, progress: bool = False) -> Dict[str, Any]:
        """
        Run the battery.

        Args:
            pair: validated projection pair
            trials: random samples per randomized check
            seed: root seed
            progress: show a tqdm bar on stderr

        Returns:
            {'success': all passed, 'generic_dim': m, 'checks': [...]}
        """
        split = self.decomposition.three_space_split(pair.A)
        checks: List[Tuple[str, Callable[[], CheckResult]]] = [
            ('kato_identity', lambda: CheckResult.at_most(
                'kato_identity', self.decomposition.kato_residual(pair), KATO_TOL)),
            ('split_reassembly', lambda: self._split_reassembly(pair, split)),
        ]
        generic_dim = split.dims['generic']
        if generic_dim:
            gp = self.decomposition.generic_part(pair)
            frame = self.decomposition.halmos_frame(gp)
            streams = iter(np.random.SeedSequence(seed).spawn(16))

            def rng() -> np.random.Generator:
                return np.random.default_rng(next(streams))

            checks += [
                ('halmos_frame', lambda: self._halmos_residual(gp, frame)),
                ('davis_anticommutation', lambda: self._anticommutation(gp)),
                ('davis_round_trip', lambda: self._davis_round_trip(gp)),
                ('spectral_symmetry', lambda: self._spectral_symmetry(gp)),
                ('friedrichs_constancy', lambda: self._friedrichs(gp, frame, trials, rng())),
                ('transitivity', lambda: self._transitivity(gp, trials, rng())),
                ('sum_norm_invariance', lambda: self._sum_norm(gp, trials, rng())),
                ('non_comparability', lambda: self._non_comparability(gp, trials, rng())),
                ('closed_form_exponential', lambda: self._closed_form(frame, trials, rng())),
                ('log_exp_identity', lambda: self._log_exp(gp, frame, trials, rng())),
                ('injectivity_radius', lambda: self._surjectivity(gp, trials, rng())),
                ('minimal_lifting', lambda: self._minimality(frame, trials, rng())),
                ('distance_symmetry', lambda: self._distance_symmetry(gp, trials, rng())),
                ('triangle_inequality', lambda: self._triangle(gp, trials, rng())),
            ]
        else:
            logger.info('pair has no generic part; running the basic checks only')

        results = []
        for name, check in tqdm(checks, desc='invariants', disable=not progress, leave=False):
            try:
                result = check()
            except InvariantFailure as e:
                logger.warning('%s raised %s: %s', name, type(e).__name__, e.message)
                result = CheckResult(name, None, 0.0, False, message=e.message, details=e.details)
            logger.debug('%s: residual %r (%s %r)', result.name, result.residual, result.comparison, result.tolerance)
            results.append(result)

        return {
            'success': all(r.passed for r in results),
            'generic_dim': generic_dim,
            'dims': split.dims,
            'trials': trials,
            'seed': seed,
            'checks': [r.to_dict() for r in results],
        }

    def _split_reassembly(self, pair: ProjectionPair, split) -> CheckResult:
        G = split.basis_generic
        A0 = adjoint(G) @ pair.A @ G
        residual = self.spectral.operator_norm(split.assemble(A0) - pair.A)
        return CheckResult.at_most('split_reassembly', residual, ROUND_TRIP_TOL, dims=split.dims)

    def _halmos_residual(self, gp: GenericPair, frame: HalmosFrame) -> CheckResult:
        P_model, Q_model = frame.model_pair()
        residual = max(
            self.spectral.operator_norm(frame.to_frame(gp.P0) - P_model),
            self.spectral.operator_norm(frame.to_frame(gp.Q0) - Q_model),
            self.spectral.unitary_residual(frame.W),
        )
        return CheckResult.at_most('halmos_frame', residual, self.tolerances.certify_tol)

    def _anticommutation(self, gp: GenericPair) -> CheckResult:
        dv = self.davis.pair_to_symmetry(gp)
        residual = self.davis.anticommutator_residual(dv.V, gp.A0) / self.spectral.operator_norm(gp.A0)
        return CheckResult.at_most('davis_anticommutation', residual, ROUND_TRIP_TOL)

    def _davis_round_trip(self, gp: GenericPair) -> CheckResult:
        dv = self.davis.pair_to_symmetry(gp)
        back = self.davis.symmetry_to_pair(gp.A0, dv)
        basis = self.davis.symmetry_to_subspace(dv)
        dv_back = self.davis.subspace_to_symmetry(basis, gp.A0)
        residual = max(
            self.spectral.operator_norm(back.P0 - gp.P0),
            self.spectral.operator_norm(back.Q0 - gp.Q0),
            self.spectral.operator_norm(dv_back.V - dv.V),
        )
        return CheckResult.at_most('davis_round_trip', residual, ROUND_TRIP_TOL)

    def _spectral_symmetry(self, gp: GenericPair) -> CheckResult:
        w = self.spectral.eigh(gp.A0).eigenvalues
        return CheckResult.at_most('spectral_symmetry', np.max(np.abs(w + w[::-1])), ROUND_TRIP_TOL)

    def _friedrichs(self, gp: GenericPair, frame: HalmosFrame, trials: int, rng) -> CheckResult:
        expected = float(np.max(frame.C))
        values = [self.decomposition.friedrichs_cos(gp.as_projection_pair())]
        values += [
            self.decomposition.friedrichs_cos(self.orbit.random_fiber_pair(gp, rng).as_projection_pair())
            for _ in range(trials)
        ]
        return CheckResult.at_most(
            'friedrichs_constancy', np.max(np.abs(np.array(values) - expected)), FRIEDRICHS_TOL, cos=expected,
        )

    def _transitivity(self, gp: GenericPair, trials: int, rng) -> CheckResult:
        worst = 0.0
        for _ in range(trials):
            target = self.orbit.random_fiber_pair(gp, rng)
            U = self.orbit.intertwining_unitary(gp, target)
            moved = self.davis.conjugate_pair(U, gp)
            worst = max(
                worst,
                self.spectral.operator_norm(moved.P0 - target.P0),
                self.spectral.operator_norm(moved.Q0 - target.Q0),
            )
        return CheckResult.at_most('transitivity', worst, CONJUGATION_TOL)

    def _sum_norm(self, gp: GenericPair, trials: int, rng) -> CheckResult:
        worst = 0.0
        for _ in range(trials):
            a, b = self.orbit.sum_norm_invariance(gp, self.orbit.random_fiber_pair(gp, rng))
            worst = max(worst, abs(a - b))
        return CheckResult.at_most('sum_norm_invariance', worst, SUM_NORM_TOL)

    def _non_comparability(self, gp: GenericPair, trials: int, rng) -> CheckResult:
        # distinct pairs of one fiber are never ordered by their sums
        straddle = np.inf
        base = gp.P0 + gp.Q0
        for _ in range(trials):
            other = self.orbit.random_fiber_pair(gp, rng)
            w = self.spectral.eigh(other.P0 + other.Q0 - base).eigenvalues
            straddle = min(straddle, float(w[-1]), float(-w[0]))
        if not np.isfinite(straddle):
            straddle = 0.0
        return CheckResult.at_least('non_comparability', straddle, STRADDLE_TOL)

    def _closed_form(self, frame: HalmosFrame, trials: int, rng) -> CheckResult:
        worst = 0.0
        for _ in range(trials):
            ht = self.random_tangent(frame, rng, rng.uniform(0.1, np.pi))
            t = rng.uniform(-1.0, 1.0)
            U = self.geodesics.exp_unitary_closed_form(ht, t)
            worst = max(worst, self.spectral.operator_norm(U - self.spectral.expm(t * ht.Z)))
        return CheckResult.at_most('closed_form_exponential', worst, EXPM_TOL)

    def _log_exp(self, gp: GenericPair, frame: HalmosFrame, trials: int, rng) -> CheckResult:
        worst = 0.0
        for _ in range(trials):
            ht = self.random_tangent(frame, rng, rng.uniform(0.05, np.pi / 2 - RADIUS_MARGIN))
            end = self.geodesics.exp_pair(gp, ht, 1.0)
            back = self.geodesics.log_pair(gp, end, frame)
            worst = max(worst, self.spectral.operator_norm(back.Y - ht.Y))
        return CheckResult.at_most('log_exp_identity', worst, LOG_EXP_TOL)

    def _surjectivity(self, gp: GenericPair, trials: int, rng) -> CheckResult:
        excess = 0.0
        for _ in range(trials):
            target = self.orbit.random_fiber_pair(gp, rng)
            norm = self.geodesics.finsler_norm(self.geodesics.log_pair(gp, target))
            excess = max(excess, norm - np.pi / 2)
        return CheckResult.at_most('injectivity_radius', excess, self.tolerances.certify_tol)

    def _minimality(self, frame: HalmosFrame, trials: int, rng) -> CheckResult:
        worst = 0.0
        for _ in range(trials):
            ht = self.random_tangent(frame, rng, rng.uniform(0.1, np.pi / 2))
            report = self.geodesics.minimality_certificate(
                ht, trials=4 * trials, seed=int(rng.integers(2 ** 32)), iterations=25,
            )
            margins = [report['descent_margin']]
            if report['min_margin'] is not None:
                margins.append(report['min_margin'])
            worst = max(worst, -min(margins))
        return CheckResult.at_most('minimal_lifting', max(worst, 0.0), self.tolerances.certify_tol)

    def _distance_symmetry(self, gp: GenericPair, trials: int, rng) -> CheckResult:
        worst = 0.0
        for _ in range(trials):
            other = self.orbit.random_fiber_pair(gp, rng)
            d1 = self.geodesics.geodesic_distance(gp, other)
            d2 = self.geodesics.geodesic_distance(other, gp)
            worst = max(worst, abs(d1 - d2))
        return CheckResult.at_most('distance_symmetry', worst, METRIC_TOL)

    def _triangle(self, gp: GenericPair, trials: int, rng) -> CheckResult:
        worst = 0.0
        for _ in range(trials):
            b = self.orbit.random_fiber_pair(gp, rng)
            c = self.orbit.random_fiber_pair(gp, rng)
            d = self.geodesics.geodesic_distance
            worst = max(worst, d(gp, c) - d(gp, b) - d(b, c))
        return CheckResult.at_most('triangle_inequality', max(worst, 0.0), TRIANGLE_TOL)
