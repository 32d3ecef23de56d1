"""Markov and Lagrange spectra of shifts of finite type and of skew products over them."""

from ._accel import BACKEND, HAVE_NUMBA
from .circle import (CircleMap, Cocycle, Decomposition, TrigLift, compose_along_orbit, convergents,
                     discrepancy, is_probably_irrational, perturbed_composition_decompose,
                     rotation_orbit, steer_conjugated, steer_rotation)
from .classical import (CFDigits, CFValue, MarkovTriple, QuadSurd, SpectrumSample, cf_eval,
                        freiman_constant, freiman_constant_surd, lagrange_value_classical,
                        markov_numbers, markov_spectrum_point, markov_triples,
                        markov_value_classical, periodic_markov_values, periodic_words)
from .dimension import (DimensionEstimate, Profile, ProfileRow, SubSFT, box_dimension,
                        cylinder_sampler, hd_sft, profile_L, spectral_radius, sub_sft_for_threshold)
from .intervals import (GridPoint, IntervalCertificate, construct_interval_nonperiodic_case,
                        construct_interval_periodic_case, revalidate_certificate)
from .model import load_model, system_from_dict, system_to_dict
from .observables import (FiberMax, FiberPoly, LinearSurface, ObservableF, bump, f_F, fiber_max,
                          fiber_observable, linear_cos, observable_from_dict, product_fg,
                          sum_fg, sum_observable, surface_observable, zero_observable)
from .skew import (MaxReport, SkewSystem, lagrange_value_skew, markov_value_skew,
                   markov_value_surface, validate_membership_R)
from .symbolic import (BiSequence, ConstructionError, DomainError, EmbeddedPoint, EmbeddingSpec,
                       Schedule, TransitionMatrix, admissible_words, check_sequence_admissible,
                       connecting_word, cylinder_box, embed, embed_orbit, is_admissible,
                       seq_metric, shift)
from .witnesses import (SeparationWitness, classify_fg_sublevel, ell_nonnegative_profile, heteroclinic_point,
                        spectra_difference_witness)

__version__ = "0.1.0"
