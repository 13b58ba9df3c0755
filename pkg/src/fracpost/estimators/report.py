"""Named estimator values and assembled bounds for one run."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..l1_stepper import Trajectory
from ..reconstruct import ReconPack, build_recon_pack
from . import terms
from .bounds import (Components, bound_cor1, bound_cor2, bound_thm1, bound_thm2_pointwise,
                     bound_thm3, bound_thm4_pointwise, compute_components, final_bounds)
from .coefficients import build_coefficients


@dataclass
class EstimatorReport:
    Eu: float | None       # true L1(L2) error, when the exact solution is known
    Eta: float             # fractional-derivative mismatch (direct)
    EU: float              # linear-reconstruction H1 term (direct)
    Ef: float              # data term
    EUhat: float           # quadratic-reconstruction H1 term (direct)
    EW: float              # correction term, interior history only (direct)
    EW_full: float         # correction term including the first-interval pieces (direct)
    thm1: float
    thm3: float
    thm5: float
    thm7: float
    cor1: float
    cor2: float
    thm2_T: float
    thm4_T: float
    thm6_T: float
    thm8_T: float
    pointwise_t: list = field(default_factory=list)
    pointwise_thm2: list = field(default_factory=list)
    pointwise_thm4: list = field(default_factory=list)
    components: Components = field(default=None, repr=False)

    def effectivity(self) -> dict:
        if not self.Eu:
            return {}
        return {k: getattr(self, k) / self.Eu for k in ("thm1", "thm3", "thm5", "thm7")}

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("components", None)
        return d


def compute_report(spec, traj: Trajectory, pack: ReconPack = None, samples: int = 8) -> EstimatorReport:
    pack = pack or build_recon_pack(traj)
    table = build_coefficients(traj.tmesh, traj.alpha)
    c = compute_components(spec, traj, pack, table)
    Eu = terms.true_error_L1L2(spec, traj) if spec.exact is not None else None
    fb = final_bounds(c)
    nodes = traj.tmesh.nodes
    idx = np.unique(np.linspace(1, traj.N, min(samples, traj.N)).round().astype(int))
    ts = [float(nodes[i]) for i in idx]
    return EstimatorReport(
        Eu=Eu,
        Eta=terms.direct_frac(traj, pack),
        EU=terms.direct_EU(traj),
        Ef=c.eta_f,
        EUhat=terms.direct_EUhat(traj, pack),
        EW=terms.direct_EW(traj, pack, include_first=False),
        EW_full=terms.direct_EW(traj, pack, include_first=True),
        thm1=bound_thm1(c), thm3=bound_thm3(c), thm5=fb["thm5"], thm7=fb["thm7"],
        cor1=bound_cor1(c), cor2=bound_cor2(c),
        thm2_T=bound_thm2_pointwise(c, c.T), thm4_T=bound_thm4_pointwise(c, c.T),
        thm6_T=fb["thm6"], thm8_T=fb["thm8"],
        pointwise_t=ts,
        pointwise_thm2=[bound_thm2_pointwise(c, t) for t in ts],
        pointwise_thm4=[bound_thm4_pointwise(c, t) for t in ts],
        components=c,
    )
