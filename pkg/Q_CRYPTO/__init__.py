from Q_CRYPTO.main import Simulation, Scenario, ExperimentConfig, StatsReport, run, replay_paper_tables
from Q_CRYPTO.main import sens_ParameterSweep
from Q_CRYPTO.quantum import (StateVector, PairState, Basis, Measurement, RECTILINEAR, DIAGONAL,
                              CIRCULAR, measure, measure_pair, epr_pair, photon_from_angle)
from Q_CRYPTO.channels import (QuantumChannelConfig, ClassicalChannelLog, Transcript, send_photon,
                               publish, seeded_rng, scripted_rng)
from Q_CRYPTO.bb84 import (alice_prepare, bob_receive, sift, detect_eavesdropping, one_time_pad,
                           run_session, SecretKey, Verdict)
from Q_CRYPTO.eve import intercept_resend, estimate_stats, strategy_from_spec
from Q_CRYPTO.auth import AuthKeyPool, AuthenticatedLink, tag_message, verify, replenish
from Q_CRYPTO.cointoss import (AliceCheatMode, toss_round, verify_certificate,
                               alice_late_fabrication, alice_epr_attack, alice_mixed_bases)

__version__ = '0.1.0'
