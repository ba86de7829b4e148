"""
Outage probability and average bit error rate
=============================================

Treating everything but the interference as deterministic turns the SINR
into a monotone function of P_ie, so outage is an upper tail of the gamma
mixture. Keeping only its dominant exponential gives a compact high-SNR
form, and the same trick gives the average BER for A erfc(sqrt(B r)).
"""

import math

import numpy as np

from mmrelay import analytics as an
from mmrelay.linksim import empirical_stats, simulate
from mmrelay.model import NetworkParams

gamma_th = 10 ** 0.8                         # 8 dB


def params(M, K):
    return NetworkParams.from_csi_quality(M, K, P=10.0, Q=10.0, P_c=0.95)


###############################################################################
# Exact tail, high-SNR form and simulation, for a short M sweep.

for K, Ms in ((8, (100, 150, 200)), (12, (170, 220))):
    for M in Ms:
        p = params(M, K)
        exact = an.outage_probability(gamma_th, p, "exact")
        high = an.outage_probability(gamma_th, p, "high_snr")
        emp = empirical_stats(simulate(p, 20_000, seed=3), thresholds=[gamma_th])
        print(f"K={K} M={M}: empirical {emp.outage[gamma_th]:.3e}  "
              f"exact {exact.value:.3e}  high-SNR {high.value:.3e}  "
              f"flags {exact.context.valid}")

###############################################################################
# The high-SNR form converges to the exact tail as M grows. Far out the
# probabilities underflow, so the comparison is done on logs.

for M in (128, 512, 2048, 8192, 32768):
    p = params(M, 8)
    e = an.outage_probability(gamma_th, p, "exact")
    h = an.outage_probability(gamma_th, p, "high_snr")
    print(f"M={M:6d}  log P_out = {e.log_value:10.2f}  ratio {math.exp(h.log_value - e.log_value):.4f}")

###############################################################################
# ABER. It equals A times the high-SNR outage at one particular threshold.

p = params(200, 8)
ab = an.aber(p, *an.BPSK)
gstar = an.aber_outage_threshold(p, B=1.0)
bridge = 0.5 * an.outage_probability(gstar, p, "high_snr").value
print(f"ABER {ab.value:.4e}, A * outage at {gstar:.2f}: {bridge:.4e}")
emp = empirical_stats(simulate(p, 50_000, seed=4))
print(f"simulated ABER {emp.aber:.4e} +/- {emp.aber_se:.1e}")
