"""A posteriori estimators, coefficient tables and assembled bounds."""
from .bounds import (Components, bound_cor1, bound_cor2, bound_thm1, bound_thm2_pointwise,
                     bound_thm3, bound_thm4_pointwise, compute_components, cor1_coefficients,
                     final_bounds)
from .coefficients import (CoefficientTable, EstimatorQuadratureError, build_coefficients,
                           moment)
from .constants import const_C_alpha_phi, const_C_alpha_T, gamma_fn
from .quadrature import kernel_convolution
from .report import EstimatorReport, compute_report
from .terms import (data_f_L1_hat, direct_EU, direct_EUhat, direct_EW, direct_frac,
                    eta_data_f, eta_EI, eta_EW, eta_frac_mismatch, eta_space_EU, eta_UR_Uhat,
                    true_error_L1L2)

__all__ = [n for n in dir() if not n.startswith("_")]
