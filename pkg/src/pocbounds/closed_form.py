"""Closed-form Tian-Pearl bounds for binary probabilities of causation.

These are the classical envelope formulas computed directly from the
experimental pair (P(y_x), P(y_x')) and the observational joint over (X, Y).
They serve two roles in this package: the marginal-information baseline in
the simulation lab, and an independent check on the optimization route (the
covariate-free linear program must reproduce them exactly).

Value convention: index 0 of the treatment plays the role of x and index 0
of the outcome the role of y, so ``p_yx`` is P(Y = 0 | do(X = 0)) under the
package-wide 0-based encoding.  Nothing depends on which labels the caller
considers "treated" or "positive"; the formulas are symmetric under
relabeling the evidence accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import EPS_EVIDENCE, BoundsInterval, EvidenceError


@dataclass(frozen=True)
class BinaryEvidence:
    """Experimental and observational evidence for binary treatment/outcome.

    Fields:
        p_yx: P(y | do(x))
        p_yxp: P(y | do(x'))
        p_xy, p_xyp, p_xpy, p_xpyp: observational joint P(X, Y) cells for
            (x,y), (x,y'), (x',y), (x',y')
        p_y: observational marginal P(y); must equal p_xy + p_xpy
    """

    p_yx: float
    p_yxp: float
    p_xy: float
    p_xyp: float
    p_xpy: float
    p_xpyp: float
    p_y: float
    eps: float = EPS_EVIDENCE

    def __post_init__(self) -> None:
        for name in ("p_yx", "p_yxp", "p_xy", "p_xyp", "p_xpy", "p_xpyp", "p_y"):
            v = getattr(self, name)
            if not -self.eps <= v <= 1.0 + self.eps:
                raise EvidenceError(f"{name} = {v} outside [0, 1]")
        total = self.p_xy + self.p_xyp + self.p_xpy + self.p_xpyp
        if abs(total - 1.0) > self.eps:
            raise EvidenceError(f"observational joint sums to {total}, not 1")
        if abs(self.p_y - (self.p_xy + self.p_xpy)) > self.eps:
            raise EvidenceError(
                f"p_y = {self.p_y} inconsistent with joint marginal "
                f"{self.p_xy + self.p_xpy}"
            )

    @property
    def p_x(self) -> float:
        return self.p_xy + self.p_xyp

    def swapped(self) -> "BinaryEvidence":
        """Relabel x <-> x' and y <-> y' (used to derive PS from PN)."""
        return BinaryEvidence(
            p_yx=1.0 - self.p_yxp,
            p_yxp=1.0 - self.p_yx,
            p_xy=self.p_xpyp,
            p_xyp=self.p_xpy,
            p_xpy=self.p_xyp,
            p_xpyp=self.p_xy,
            p_y=1.0 - self.p_y,
            eps=self.eps,
        )


def _clamp01(v: float) -> float:
    return min(max(v, 0.0), 1.0)


def tp_pns_bounds(ev: BinaryEvidence) -> BoundsInterval:
    """Tight closed-form bounds on PNS = P(y_x, y'_x')."""
    lb = max(
        0.0,
        ev.p_yx - ev.p_yxp,
        ev.p_y - ev.p_yxp,
        ev.p_yx - ev.p_y,
    )
    ub = min(
        ev.p_yx,
        1.0 - ev.p_yxp,
        ev.p_xy + ev.p_xpyp,
        ev.p_yx - ev.p_yxp + ev.p_xyp + ev.p_xpy,
    )
    return BoundsInterval(_clamp01(lb), _clamp01(ub))


def tp_pn_bounds(ev: BinaryEvidence) -> BoundsInterval:
    """Tight closed-form bounds on PN = P(y'_x' | x, y); needs P(x, y) > 0."""
    if ev.p_xy <= 0.0:
        raise EvidenceError("PN is undefined: P(x, y) = 0")
    lb = max(0.0, (ev.p_y - ev.p_yxp) / ev.p_xy)
    ub = min(1.0, ((1.0 - ev.p_yxp) - ev.p_xpyp) / ev.p_xy)
    return BoundsInterval(_clamp01(lb), _clamp01(ub))


def tp_ps_bounds(ev: BinaryEvidence) -> BoundsInterval:
    """Tight closed-form bounds on PS = P(y_x | x', y'); needs P(x', y') > 0."""
    if ev.p_xpyp <= 0.0:
        raise EvidenceError("PS is undefined: P(x', y') = 0")
    return tp_pn_bounds(ev.swapped())
