"""Non-memoryless analog network coding relay simulation library."""

from .baselines import BaselineOutput, amplify_forward, memoryless_mmse, mrc_repeat_combine
from .channel import (ChannelRealization, CoeffDist, cancel_self_interference,
                      complex_awgn, downlink, modulate_bpsk, sample_channel,
                      sigma2_from_snr_db, snr_db_from_sigma2, uplink_superpose)
from .harness import (ChannelSpec, ExperimentConfig, SummaryRecord, TrialRecord,
                      emit_csv, fig4_config, fig5_config, run_experiment, run_trial)
from .jointbp import (DecodeResult, JointDecoder, chk_update, clamp_user, decode,
                      hard_decide, hard_decisions, init_evidence, pair_constellation,
                      pair_convolve, relay_mmse_output, var_update)
from .ldpc import (GeneratorMatrix, LdpcError, ParityCheckMatrix, build_gallager,
                   derive_generator, encode, read_alist, syndrome, write_alist)
from .metrics import (CurveError, MseCurve, estimate_f1_curve, memoryless_mse_exact,
                      quadrature_curve, relay_ber, relay_mse, snr_gain_lower_bound,
                      snr_improvement, snr_improvement_conditioned)

__version__ = "0.1.0"
