"""Random instance generators shared by the test modules."""

import numpy as np

from sparse_cran.qcqp import QcqpSubproblem
from sparse_cran.topology import NetworkConfig, build_layout


def random_channel(rng, K, N, Mt, scale=1.0):
    return scale * (rng.standard_normal((K, N, Mt)) + 1j * rng.standard_normal((K, N, Mt))) / np.sqrt(2)


def random_subproblem(rng, L=2, K=3, M=2, N=2, cluster_wide=None, finite_backhaul=True):
    """Random subproblem of the shape the engine builds: A = sum_j c_j g_j g_j^H, b_k = c_k g_k."""
    Mt = L * M
    owner = np.repeat(np.arange(L), M)
    H = random_channel(rng, K, N, Mt)
    U = rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))
    c = rng.uniform(0.5, 2.0, K)
    G = np.einsum("knm,kn->km", H.conj(), U)
    A = (G.T * c) @ G.conj()
    A = 0.5 * (A + A.conj().T)
    if cluster_wide is None:
        cluster_wide = bool(rng.random() < 0.5)
    return QcqpSubproblem(
        A=A, b=c[:, None] * G, support=rng.random((K, Mt)) > 0.2, antenna_owner=owner,
        power_budget=rng.uniform(0.05, 1.0, L),
        backhaul_budget=rng.uniform(0.1, 2.0, L) if finite_backhaul else np.full(L, np.inf),
        backhaul_coeff=rng.uniform(0.5, 3.0, (L, K)), cluster_wide=cluster_wide)


def synthetic_instance(rng, K=4, L=2, M=2, N=2, noise=0.05, backhaul=None):
    """Small engine instance in natural units: ``(channel, layout)`` lookalikes.

    Only the attributes the engine reads are provided. Each BS has power 1;
    ``backhaul`` is a per-BS budget array (``None`` for unconstrained).
    """
    from types import SimpleNamespace

    owner = np.repeat(np.arange(L), M)
    gain = 10 ** rng.uniform(-1.5, 0.5, (K, L))
    H = random_channel(rng, K, N, L * M) * np.sqrt(gain[:, owner])[:, None, :]
    channel = SimpleNamespace(H=H, noise_var=noise, num_users=K, slot_index=0)
    layout = SimpleNamespace(
        num_bs=L, antenna_owner=owner, power_mw_hz=np.ones(L),
        backhaul_bps_hz=np.full(L, np.inf) if backhaul is None else np.asarray(backhaul, float))
    return channel, layout


#: PASS/FAIL lines of the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES = []
