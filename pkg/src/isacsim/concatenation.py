"""Concatenation of the two sensing hops into joint target paths.

The target channel is the composition of the transmitter-to-target hop (P)
and the target-to-receiver hop (Q). Each hop contributes a specular part
(present under LOS) and a diffuse part, giving four component types named by
the (P, Q) parts they combine: LL, LN, NL, NN. The diffuse-diffuse (NN)
component is where the down-selection strategies differ:

=========  ===========================================================
Case name  NN pairing rule
=========  ===========================================================
CaseA      dropped entirely (only LOS-involving components remain)
Case0      full convolution: every ray pair, P*M x Q*M' paths
Case1      every cluster pair, rays coupled one-by-one by index
Case2O     clusters coupled one-by-one in ascending delay order
Case2R     clusters coupled one-by-one at random, rays paired at random
Case3      all rays pooled per hop, then paired one-by-one at random
=========  ===========================================================

A trailing 'N' (Case1N, Case2ON, Case2RN, Case3N) rescales the NN weights
so their power sums to one, restoring the full-convolution NN power budget.
Unequal cluster counts pair min(P, Q) clusters; unequal ray counts pair
min(M, M') rays (the pooled case pairs min-pool-size rays).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .errors import ConfigError
from .seeds import RandomStreams
from .smallscale import SubLinkClusters


class ConcatCase(str, Enum):
    CASE_A = "CaseA"
    CASE_0 = "Case0"
    CASE_1 = "Case1"
    CASE_2O = "Case2O"
    CASE_2R = "Case2R"
    CASE_3 = "Case3"
    CASE_1N = "Case1N"
    CASE_2ON = "Case2ON"
    CASE_2RN = "Case2RN"
    CASE_3N = "Case3N"

    @property
    def normalizes_nn(self) -> bool:
        return self.value.endswith("N") and self is not ConcatCase.CASE_A

    @property
    def base(self) -> "ConcatCase":
        """The same pairing rule without the NN power rescale."""
        if self.normalizes_nn:
            return ConcatCase(self.value[:-1])
        return self

    @property
    def uses_randomness(self) -> bool:
        return self.base in (ConcatCase.CASE_2R, ConcatCase.CASE_3)


RECOMMENDED_CASES = (ConcatCase.CASE_2RN, ConcatCase.CASE_3N)
ALL_CASES = tuple(ConcatCase)


class PairType(IntEnum):
    """Component a joint path belongs to (specular/diffuse per hop)."""

    LL = 0
    LN = 1
    NL = 2
    NN = 3
    BACKGROUND = 4


def condition_weights(k_p: float, k_q: float) -> np.ndarray:
    """Amplitude prefactors (LL, LN, NL, NN) from the two hop K-factors.

    Each hop splits into sqrt(K/(K+1)) specular and sqrt(1/(K+1)) diffuse
    amplitude shares; the four products always satisfy sum(w^2) == 1.
    K = 0 (no specular part) and the K -> inf limit are exact.
    """
    if k_p < 0 or k_q < 0:
        raise ConfigError("K-factors must be >= 0")

    def split(k):
        if math.isinf(k):
            return 1.0, 0.0
        return math.sqrt(k / (k + 1.0)), math.sqrt(1.0 / (k + 1.0))

    sp, dp = split(k_p)
    sq, dq = split(k_q)
    return np.array([sp * sq, sp * dq, dp * sq, dp * dq])


@dataclass
class TargetPathSet:
    """Joint two-hop paths as flat parallel arrays (one entry per path).

    weight holds the stored amplitude weight of each path (condition
    prefactors NOT included; see k_weights). Angle arrays are radians:
    tx_* is the departure at the transmit node, rx_* the arrival at the
    receive node, spin_* the arrival at the target on the first hop,
    spout_* the departure from the target on the second hop. Cluster/ray
    index -1 marks a specular (LOS) hop side.
    """

    case: ConcatCase
    tx_link: SubLinkClusters
    rx_link: SubLinkClusters
    pair_type: np.ndarray
    joint_delay: np.ndarray
    weight: np.ndarray
    tx_zenith: np.ndarray
    tx_azimuth: np.ndarray
    spin_zenith: np.ndarray
    spin_azimuth: np.ndarray
    spout_zenith: np.ndarray
    spout_azimuth: np.ndarray
    rx_zenith: np.ndarray
    rx_azimuth: np.ndarray
    tx_cluster: np.ndarray
    tx_ray: np.ndarray
    rx_cluster: np.ndarray
    rx_ray: np.ndarray
    k_weights: np.ndarray
    nn_normalized: bool = False

    def __len__(self):
        return int(self.pair_type.shape[0])

    @property
    def condition_pair(self) -> str:
        """Hop condition labels, e.g. 'LL' when both hops are LOS."""
        t = "L" if self.tx_link.has_los else "N"
        r = "L" if self.rx_link.has_los else "N"
        return t + r


class _FlatRays:
    """One hop's diffuse rays flattened to parallel (N*M,) arrays."""

    def __init__(self, sub: SubLinkClusters):
        n, m = sub.aod.shape
        self.n, self.m = n, m
        total = sub.cluster_powers.sum()
        ray_power = sub.cluster_powers[:, None] / m / total
        self.weight = np.sqrt(np.broadcast_to(ray_power, (n, m))).ravel()
        self.delay = sub.ray_delays.ravel()
        self.dep_zen = sub.zod.ravel()
        self.dep_azi = sub.aod.ravel()
        self.arr_zen = sub.zoa.ravel()
        self.arr_azi = sub.aoa.ravel()
        self.cluster = np.repeat(np.arange(n, dtype=np.int32), m)
        self.ray = np.tile(np.arange(m, dtype=np.int32), n)


def _nn_indices(case, tx, rx, streams):
    """Index pairs (into the flat tx/rx ray arrays) for the NN component."""
    p, m = tx.n, tx.m
    q, m2 = rx.n, rx.m
    mm = min(m, m2)
    pq = min(p, q)
    base = case.base
    if base is ConcatCase.CASE_0:
        it = np.repeat(np.arange(p * m), q * m2)
        ir = np.tile(np.arange(q * m2), p * m)
        return it, ir
    if base is ConcatCase.CASE_1:
        pp = np.repeat(np.arange(p), q)  # all P x Q cluster pairs
        qq = np.tile(np.arange(q), p)
        rays = np.arange(mm)
        it = (pp[:, None] * m + rays[None, :]).ravel()
        ir = (qq[:, None] * m2 + rays[None, :]).ravel()
        return it, ir
    if base is ConcatCase.CASE_2O:
        cl = np.arange(pq)
        rays = np.arange(mm)
        it = (cl[:, None] * m + rays[None, :]).ravel()
        ir = (cl[:, None] * m2 + rays[None, :]).ravel()
        return it, ir
    if base is ConcatCase.CASE_2R:
        rng = streams.stream("concat_pairing")
        tx_cl = rng.permutation(p)[:pq]
        rx_cl = rng.permutation(q)[:pq]
        ray_perm = np.argsort(rng.random((pq, mm)), axis=1)
        it = (tx_cl[:, None] * m + np.arange(mm)[None, :]).ravel()
        ir = (rx_cl[:, None] * m2 + ray_perm).ravel()
        return it, ir
    if base is ConcatCase.CASE_3:
        rng = streams.stream("concat_pairing")
        npaths = min(p * m, q * m2)
        it = rng.permutation(p * m)[:npaths]
        ir = rng.permutation(q * m2)[:npaths]
        return it, ir
    raise ConfigError(f"no NN pairing rule for {case}")


def concatenate(
    tx_link: SubLinkClusters,
    rx_link: SubLinkClusters,
    case: ConcatCase,
    streams: RandomStreams | None = None,
) -> TargetPathSet:
    """Build the joint path set of the two hops for one down-selection case.

    Deterministic cases work with streams=None; the randomized pairings
    (Case2R, Case3 and their normalized variants) require a stream factory
    scoped to the concatenation stage.
    """
    case = ConcatCase(case)
    if case.uses_randomness and streams is None:
        raise ConfigError(f"{case.value} needs random streams for its pairing")
    tx = _FlatRays(tx_link)
    rx = _FlatRays(rx_link)
    if tx.n < 1 or rx.n < 1:
        raise ConfigError("both hops need at least one cluster")

    k_w = condition_weights(
        tx_link.hop.k_factor if tx_link.has_los else 0.0,
        rx_link.hop.k_factor if rx_link.has_los else 0.0,
    )

    parts = []  # (pair_type, delay, weight, 8 angle cols, 4 index cols)

    def los_scalars(sub):
        dep = sub.los_departure
        arr = sub.los_arrival
        return dep.zenith, dep.azimuth, arr.zenith, arr.azimuth

    if tx_link.has_los and rx_link.has_los:
        tdz, tda, taz, taa = los_scalars(tx_link)
        rdz, rda, raz, raa = los_scalars(rx_link)
        parts.append((
            PairType.LL,
            np.array([tx_link.los_delay + rx_link.los_delay]),
            np.array([1.0]),
            np.array([tdz]), np.array([tda]),
            np.array([taz]), np.array([taa]),
            np.array([rdz]), np.array([rda]),
            np.array([raz]), np.array([raa]),
            np.array([-1], np.int32), np.array([-1], np.int32),
            np.array([-1], np.int32), np.array([-1], np.int32),
        ))
    if tx_link.has_los:
        tdz, tda, taz, taa = los_scalars(tx_link)
        nr = rx.weight.shape[0]
        parts.append((
            PairType.LN,
            tx_link.los_delay + rx.delay,
            rx.weight.copy(),
            np.full(nr, tdz), np.full(nr, tda),
            np.full(nr, taz), np.full(nr, taa),
            rx.dep_zen, rx.dep_azi,
            rx.arr_zen, rx.arr_azi,
            np.full(nr, -1, np.int32), np.full(nr, -1, np.int32),
            rx.cluster, rx.ray,
        ))
    if rx_link.has_los:
        rdz, rda, raz, raa = los_scalars(rx_link)
        nt = tx.weight.shape[0]
        parts.append((
            PairType.NL,
            tx.delay + rx_link.los_delay,
            tx.weight.copy(),
            tx.dep_zen, tx.dep_azi,
            tx.arr_zen, tx.arr_azi,
            np.full(nt, rdz), np.full(nt, rda),
            np.full(nt, raz), np.full(nt, raa),
            tx.cluster, tx.ray,
            np.full(nt, -1, np.int32), np.full(nt, -1, np.int32),
        ))
    if case is not ConcatCase.CASE_A:
        it, ir = _nn_indices(case, tx, rx, streams)
        w = tx.weight[it] * rx.weight[ir]
        if case.normalizes_nn:
            total = float(np.sum(w ** 2))
            if total <= 0:
                raise ConfigError("cannot normalize an empty diffuse component")
            w = w / math.sqrt(total)
        parts.append((
            PairType.NN,
            tx.delay[it] + rx.delay[ir],
            w,
            tx.dep_zen[it], tx.dep_azi[it],
            tx.arr_zen[it], tx.arr_azi[it],
            rx.dep_zen[ir], rx.dep_azi[ir],
            rx.arr_zen[ir], rx.arr_azi[ir],
            tx.cluster[it], tx.ray[it],
            rx.cluster[ir], rx.ray[ir],
        ))

    if not parts:
        # CaseA with both hops NLOS leaves nothing to keep.
        empty_f = np.empty(0)
        empty_i = np.empty(0, np.int32)
        return TargetPathSet(
            case=case, tx_link=tx_link, rx_link=rx_link,
            pair_type=np.empty(0, np.int8),
            joint_delay=empty_f, weight=empty_f,
            tx_zenith=empty_f, tx_azimuth=empty_f,
            spin_zenith=empty_f, spin_azimuth=empty_f,
            spout_zenith=empty_f, spout_azimuth=empty_f,
            rx_zenith=empty_f, rx_azimuth=empty_f,
            tx_cluster=empty_i, tx_ray=empty_i,
            rx_cluster=empty_i, rx_ray=empty_i,
            k_weights=k_w, nn_normalized=case.normalizes_nn,
        )

    def cat(idx):
        return np.concatenate([np.asarray(p[idx], dtype=float) for p in parts])

    pair_type = np.concatenate(
        [np.full(p[1].shape[0], int(p[0]), np.int8) for p in parts]
    )
    return TargetPathSet(
        case=case,
        tx_link=tx_link,
        rx_link=rx_link,
        pair_type=pair_type,
        joint_delay=cat(1),
        weight=cat(2),
        tx_zenith=cat(3), tx_azimuth=cat(4),
        spin_zenith=cat(5), spin_azimuth=cat(6),
        spout_zenith=cat(7), spout_azimuth=cat(8),
        rx_zenith=cat(9), rx_azimuth=cat(10),
        tx_cluster=np.concatenate([p[11] for p in parts]),
        tx_ray=np.concatenate([p[12] for p in parts]),
        rx_cluster=np.concatenate([p[13] for p in parts]),
        rx_ray=np.concatenate([p[14] for p in parts]),
        k_weights=k_w,
        nn_normalized=case.normalizes_nn,
    )


def nn_total_power(paths: TargetPathSet) -> float:
    """Sum of squared stored weights over the diffuse-diffuse component."""
    mask = paths.pair_type == int(PairType.NN)
    return float(np.sum(paths.weight[mask] ** 2))


def ray_marginal_power(paths: TargetPathSet, side: str = "tx") -> np.ndarray:
    """Per-(cluster, ray) power of the NN component marginalized to one hop.

    Returns an (N, M) array of summed squared weights. The full convolution
    and its power-normalized one-by-one variant produce identical marginals.
    """
    if side == "tx":
        sub, cl, ray = paths.tx_link, paths.tx_cluster, paths.tx_ray
    elif side == "rx":
        sub, cl, ray = paths.rx_link, paths.rx_cluster, paths.rx_ray
    else:
        raise ConfigError(f"side must be 'tx' or 'rx', got {side!r}")
    n, m = sub.aod.shape
    mask = paths.pair_type == int(PairType.NN)
    flat = cl[mask].astype(np.int64) * m + ray[mask]
    acc = np.bincount(flat, weights=paths.weight[mask] ** 2, minlength=n * m)
    return acc.reshape(n, m)
