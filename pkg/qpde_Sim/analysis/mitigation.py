# ==============================================================================
# mitigation.py - 알고리즘 오차 완화 (AEM)
# ==============================================================================
# 여러 Δt 에서 얻은 간격을 f(Δt) = a·Δt² + b 로 최소제곱 맞춤하고,
# Δt → 0 극한인 b 를 완화된 간격으로 사용합니다.
# ==============================================================================
import logging
from dataclasses import dataclass

import numpy as np

from utils import QpdeInputError, chemical_precision_hartree, hartree_to_ev, hartree_to_kcal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AemFit:
    b: float
    a: float
    residual_norm: float
    dts: tuple
    values: tuple

    def predict(self, dt) -> np.ndarray:
        return self.a * np.asarray(dt, dtype=float) ** 2 + self.b


def aem_extrapolate(points) -> AemFit:
    """
    points: (Δt, ΔE) 목록. 서로 다른 Δt 가 2개 이상 필요합니다.
    두 점이면 보간, 세 점 이상이면 {1, Δt²} 기저 최소제곱.
    """
    points = [(float(dt), float(v)) for dt, v in points]
    if len({dt for dt, _ in points}) < 2:
        raise QpdeInputError(f"AEM 에는 서로 다른 Δt 가 2개 이상 필요합니다: {[dt for dt, _ in points]}")
    dts = np.array([dt for dt, _ in points])
    values = np.array([v for _, v in points])
    design = np.column_stack([np.ones_like(dts), dts**2])
    (b, a), *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = float(np.linalg.norm(design @ np.array([b, a]) - values))
    logger.info("AEM 맞춤: b=%.8f, a=%.8f, 잔차=%.3e", b, a, residual)
    return AemFit(float(b), float(a), residual, tuple(dts.tolist()), tuple(values.tolist()))


def precision_summary(fit: AemFit, reference: float | None = None) -> dict:
    """완화된 간격의 단위 환산과 화학적 정밀도(1 kcal/mol) 판정."""
    summary = {
        "mitigated_gap_hartree": fit.b,
        "mitigated_gap_ev": hartree_to_ev(fit.b),
        "mitigated_gap_kcal_mol": hartree_to_kcal(fit.b),
        "quadratic_coefficient": fit.a,
        "residual_norm": fit.residual_norm,
    }
    if reference is not None:
        deviation = fit.b - reference
        summary.update(
            {
                "reference_gap_hartree": reference,
                "deviation_hartree": deviation,
                "deviation_ev": hartree_to_ev(deviation),
                "deviation_kcal_mol": hartree_to_kcal(deviation),
                "within_chemical_precision": bool(abs(deviation) <= chemical_precision_hartree()),
            }
        )
    return summary
