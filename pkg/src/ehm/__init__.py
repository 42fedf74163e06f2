"""Spectral toolkit for the extended Harper model."""

from .arith import (BetaEstimate, ContinuedFraction, beta_estimate,
                    best_approx_distance, cf_from_real, circle_norm,
                    convergents, liouville_build)
from .fourier import FourierSeries, fourier_truncate, series_from_grid
from .operator import (ClosedFormRates, CocycleSampler, Coupling, ParameterSet,
                       abs_c_eval, c_eval, classify_region,
                       closed_form_constants, cocycle_step, dual_coupling,
                       hyperbolic_lock, lyapunov_numeric, rotation_number,
                       transfer_product)
from .spectrum import (JacobiTruncation, SpectralGap, bands_rational,
                       eig_count, gap_edges, green_entry, ids, label_gap,
                       pk_determinant, tridiag_eigs, truncation)
from .localization import (DecayProfile, ResonanceSet, decay_measure,
                           dual_eigenvector, essential_degree_select,
                           gamma_uniformity, resonance_gaps_check, resonances)
from .reducibility import (AveragingReport, GapCertificate, NormalFormResult,
                           averaging_first_order, certify_gap, degree,
                           gap_certificate, homological_solve,
                           invariant_section, normal_form_at_edge,
                           perturbed_cocycle, r_moments)
from .config import RunConfig, parse_config, serialize_config
from .experiments import DecayFit, decay_experiment, fit_loglinear, verify_suite

__version__ = "0.1.0"
