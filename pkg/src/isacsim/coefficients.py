"""Channel impulse response synthesis from joint path sets.

Produces, per antenna pair (u, s), per path, per snapshot time, the complex
gain

    k_weight * F_rx(arr)^T * P * F_tx(dep)
      * exp(j 2 pi r_rx . d_u / lambda) * exp(j 2 pi r_tx . d_s / lambda)
      * exp(j 2 pi f_d t) * weight * sqrt(sigma)

where P sandwiches the target scattering matrix between the per-hop
polarization matrices (LOS diagonal or XPR cross-coupling), f_d sums the
four Doppler contributions of transmitter, receiver, and the scattering
point's in/out directions, and sigma is the per-path small-scale cross
section. Geometry is frozen within a drop: only the Doppler exponential
depends on t.

The target-channel gains carry no path-loss scale (the two-hop budget with
the mean RCS is a separate large-scale quantity); the single-hop background
generator does fold its path loss and shadowing into the gains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnsupportedFeatureError
from .geometry import (
    AntennaElement,
    DirectionAngles,
    NodeState,
    field_components,
    spherical_unit_vector,
)
from .largescale import CouplingConfig, ScenarioParams, build_hop
from .concatenation import PairType, TargetPathSet
from .rcs import PolarizationScattering, RcsModel, scattering_matrix, small_scale_sigma
from .seeds import RandomStreams
from .smallscale import SubLinkClusters, generate_sublink


@dataclass
class SnapshotGrid:
    """Uniform time sampling of a drop: start, step, number of snapshots."""

    start_s: float = 0.0
    step_s: float = 1e-3
    count: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("snapshot count must be >= 1")
        if self.step_s <= 0:
            raise ConfigError("snapshot step must be positive")

    def times(self) -> np.ndarray:
        return self.start_s + self.step_s * np.arange(self.count)


@dataclass
class TargetChannelCir:
    """Synthesized impulse response: delays (L,), gains (U, S, L, T)."""

    delays: np.ndarray
    gains: np.ndarray
    pair_type: np.ndarray
    grid: SnapshotGrid
    case: str | None = None
    condition_pair: str | None = None

    @property
    def num_paths(self) -> int:
        return int(self.delays.shape[0])

    def component_power(self, pair_type: int, u: int = 0, s: int = 0, t: int = 0) -> float:
        """Sum of |gain|^2 over paths of one component at one (u, s, t)."""
        mask = self.pair_type == pair_type
        return float(np.sum(np.abs(self.gains[u, s, mask, t]) ** 2))


def _los_diag(phase: float) -> np.ndarray:
    e = complex(math.cos(phase), math.sin(phase))
    return np.array([[e, 0.0], [0.0, -e]], dtype=complex)


def _xpr_matrix(xpr: float, phases) -> np.ndarray:
    inv = math.sqrt(1.0 / xpr)
    p = np.asarray(phases, dtype=float)
    if p.shape != (4,):
        raise ConfigError("XPR matrix needs four initial phases")
    return np.array(
        [
            [np.exp(1j * p[0]), inv * np.exp(1j * p[1])],
            [inv * np.exp(1j * p[2]), np.exp(1j * p[3])],
        ],
        dtype=complex,
    )


def polarization_matrix(
    pair_type: int,
    s_matrix=None,
    tx_xpr: float | None = None,
    tx_phases=None,
    rx_xpr: float | None = None,
    rx_phases=None,
    tx_los_phase: float = 0.0,
    rx_los_phase: float = 0.0,
) -> np.ndarray:
    """2x2 polarization transfer of one path: rx side @ S @ tx side.

    The LOS side is the diagonal [[e^{j phi}, 0], [0, -e^{j phi}]]; the
    NLOS side is the XPR matrix with sqrt(1/kappa) off-diagonal scaling.
    """
    pt = PairType(pair_type)
    s = np.eye(2, dtype=complex) if s_matrix is None else np.asarray(s_matrix, complex)
    if s.shape != (2, 2):
        raise ConfigError("scattering matrix must be 2x2")
    if pt in (PairType.LL, PairType.LN):
        tx_side = _los_diag(tx_los_phase)
    else:
        if tx_xpr is None or tx_phases is None:
            raise ConfigError("missing ray data on the NLOS transmit side")
        tx_side = _xpr_matrix(tx_xpr, tx_phases)
    if pt in (PairType.LL, PairType.NL):
        rx_side = _los_diag(rx_los_phase)
    else:
        if rx_xpr is None or rx_phases is None:
            raise ConfigError("missing ray data on the NLOS receive side")
        rx_side = _xpr_matrix(rx_xpr, rx_phases)
    return rx_side @ s @ tx_side


def doppler_frequency(
    tx_dir: DirectionAngles,
    rx_dir: DirectionAngles,
    sp_in_dir: DirectionAngles,
    sp_out_dir: DirectionAngles,
    v_tx,
    v_rx,
    v_sp,
    wavelength_m: float,
):
    """Per-path Doppler in Hz from the four direction/velocity couplings.

    tx_dir is the departure direction at the transmitter, rx_dir the
    arrival direction at the receiver (pointing back toward the scatterer),
    sp_in_dir/sp_out_dir the arrival/departure directions at the scattering
    point. v_sp should already include any internal (micro) motion.
    """
    if wavelength_m <= 0:
        raise ConfigError(f"wavelength must be positive, got {wavelength_m}")
    v_tx = np.asarray(v_tx, float)
    v_rx = np.asarray(v_rx, float)
    v_sp = np.asarray(v_sp, float)
    total = (
        spherical_unit_vector(rx_dir) @ v_rx
        + spherical_unit_vector(sp_out_dir) @ v_sp
        + spherical_unit_vector(tx_dir) @ v_tx
        + spherical_unit_vector(sp_in_dir) @ v_sp
    )
    return total / wavelength_m


def _side_matrices(
    sub: SubLinkClusters, cluster_idx, ray_idx, wavelength_m: float
) -> np.ndarray:
    """(L, 2, 2) per-path transfer of one hop: LOS diagonal or XPR matrix."""
    n_paths = cluster_idx.shape[0]
    out = np.zeros((n_paths, 2, 2), dtype=complex)
    los = cluster_idx < 0
    if np.any(los):
        phase = -2.0 * np.pi * sub.hop.d3d_m / wavelength_m
        e = np.exp(1j * phase)
        out[los, 0, 0] = e
        out[los, 1, 1] = -e
    nl = ~los
    if np.any(nl):
        ci = cluster_idx[nl]
        ri = ray_idx[nl]
        inv = np.sqrt(1.0 / sub.xpr[ci, ri])
        ph = sub.phases[ci, ri]  # (n, 4): theta-theta, theta-phi, phi-theta, phi-phi
        out[nl, 0, 0] = np.exp(1j * ph[:, 0])
        out[nl, 0, 1] = inv * np.exp(1j * ph[:, 1])
        out[nl, 1, 0] = inv * np.exp(1j * ph[:, 2])
        out[nl, 1, 1] = np.exp(1j * ph[:, 3])
    return out


def _field_matrix(elements, zenith, azimuth):
    """Field components of each element toward per-path directions: (E, L, 2)."""
    dirs = DirectionAngles(zenith=zenith, azimuth=azimuth)
    rows = []
    for el in elements:
        f_t, f_p = field_components(el, dirs)
        rows.append(np.stack([np.broadcast_to(f_t, zenith.shape),
                              np.broadcast_to(f_p, zenith.shape)], axis=-1))
    return np.stack(rows, axis=0)


def _array_phases(elements, zenith, azimuth, wavelength_m):
    """exp(j 2 pi r_hat . d_e / lambda) per element and path: (E, L)."""
    units = spherical_unit_vector(DirectionAngles(zenith=zenith, azimuth=azimuth))
    offs = np.stack([el.offset_m for el in elements], axis=0)  # (E, 3)
    proj = offs @ units.T  # (E, L)
    return np.exp(2j * np.pi * proj / wavelength_m)


def synthesize_target_cir(
    paths: TargetPathSet,
    tx_elements: list,
    rx_elements: list,
    rcs_model: RcsModel,
    grid: SnapshotGrid,
    wavelength_m: float,
    streams: RandomStreams,
    polarization: PolarizationScattering | None = None,
) -> TargetChannelCir:
    """Synthesize the two-hop target channel for every antenna pair.

    streams must be scoped to the coefficient stage of the drop; it feeds
    the per-path cross-section fluctuation and, for non-identity
    polarization modes, the scattering-matrix phases. Identity polarization
    consumes no randomness for the scattering matrix.
    """
    if wavelength_m <= 0:
        raise ConfigError(f"wavelength must be positive, got {wavelength_m}")
    if not tx_elements or not rx_elements:
        raise ConfigError("both arrays need at least one element")
    tx_sub = paths.tx_link
    rx_sub = paths.rx_link
    if not np.allclose(
        tx_sub.hop.to_node.position_m, rx_sub.hop.from_node.position_m
    ):
        raise ConfigError("hops do not share the scattering point")

    n_paths = len(paths)
    n_u, n_s, n_t = len(rx_elements), len(tx_elements), grid.count
    pol = polarization or PolarizationScattering()

    # Per-path small-scale cross section; aspect is the incidence azimuth
    # at the scattering point.
    sigma = small_scale_sigma(
        rcs_model,
        np.degrees(paths.spin_azimuth),
        streams.stream("rcs_b2"),
        size=n_paths,
    )
    sigma = np.broadcast_to(np.asarray(sigma, float), (n_paths,))

    if pol.mode == "identity":
        smat = scattering_matrix(pol, None, size=n_paths)
    else:
        smat = scattering_matrix(pol, streams.stream("scatter_phases"), size=n_paths)

    tx_side = _side_matrices(tx_sub, paths.tx_cluster, paths.tx_ray, wavelength_m)
    rx_side = _side_matrices(rx_sub, paths.rx_cluster, paths.rx_ray, wavelength_m)
    pmat = np.einsum("lij,ljk,lkm->lim", rx_side, smat, tx_side)

    tx_node = tx_sub.hop.from_node
    target = tx_sub.hop.to_node
    rx_node = rx_sub.hop.to_node
    f_d = doppler_frequency(
        DirectionAngles(paths.tx_zenith, paths.tx_azimuth),
        DirectionAngles(paths.rx_zenith, paths.rx_azimuth),
        DirectionAngles(paths.spin_zenith, paths.spin_azimuth),
        DirectionAngles(paths.spout_zenith, paths.spout_azimuth),
        tx_node.velocity_mps,
        rx_node.velocity_mps,
        target.total_velocity_mps,
        wavelength_m,
    )
    f_d = np.broadcast_to(np.asarray(f_d, float), (n_paths,))

    amp = paths.k_weights[paths.pair_type] * paths.weight * np.sqrt(sigma)
    doppler = np.exp(2j * np.pi * np.outer(f_d, grid.times()))  # (L, T)
    time_block = amp[:, None] * doppler

    f_rx = _field_matrix(rx_elements, paths.rx_zenith, paths.rx_azimuth)  # (U, L, 2)
    f_tx = _field_matrix(tx_elements, paths.tx_zenith, paths.tx_azimuth)  # (S, L, 2)
    ph_rx = _array_phases(rx_elements, paths.rx_zenith, paths.rx_azimuth, wavelength_m)
    ph_tx = _array_phases(tx_elements, paths.tx_zenith, paths.tx_azimuth, wavelength_m)

    # scalar(u, s, l) = f_rx(u, l) . P(l) . f_tx(s, l)
    scalar = np.einsum("ula,lab,slb->usl", f_rx, pmat, f_tx)
    scalar = scalar * ph_rx[:, None, :] * ph_tx[None, :, :]
    gains = scalar[..., None] * time_block[None, None, ...]

    return TargetChannelCir(
        delays=paths.joint_delay.copy(),
        gains=gains,
        pair_type=paths.pair_type.copy(),
        grid=grid,
        case=paths.case.value,
        condition_pair=paths.condition_pair,
    )


def synthesize_background_cir(
    tx_node: NodeState,
    rx_node: NodeState,
    scenario: ScenarioParams,
    grid: SnapshotGrid,
    wavelength_m: float,
    streams: RandomStreams,
    tx_elements: list | None = None,
    rx_elements: list | None = None,
    sensing_mode: str = "bistatic",
    force_condition: str | None = None,
) -> TargetChannelCir:
    """Single-hop environment channel between transmitter and receiver.

    Standard one-hop cluster channel: diffuse rays weighted by the Rician
    diffuse share, plus the specular ray under LOS. Path loss and shadow
    fading are folded into the gains as 10^(-(PL+SF)/20). Only the
    bi-static arrangement has a defined environment hop; mono-static
    background generation is intentionally refused.
    """
    if sensing_mode != "bistatic":
        raise UnsupportedFeatureError(
            "mono-static background channels are not modeled (direct reuse of "
            "the one-hop statistical model has no self-to-self link); run "
            "bi-static or disable the background"
        )
    if wavelength_m <= 0:
        raise ConfigError(f"wavelength must be positive, got {wavelength_m}")
    tx_elements = tx_elements or [AntennaElement()]
    rx_elements = rx_elements or [AntennaElement()]

    hop = build_hop(tx_node, rx_node, scenario, streams, force_condition)
    params = scenario.condition_params(hop.condition)
    sub = generate_sublink(hop, params, streams)

    n, m = sub.aod.shape
    total = sub.cluster_powers.sum()
    k = hop.k_factor if sub.has_los else 0.0
    diffuse_share = math.sqrt(1.0 / (1.0 + k))
    ray_w = np.sqrt(
        np.broadcast_to(sub.cluster_powers[:, None] / m / total, (n, m))
    ).ravel() * diffuse_share

    delays = sub.ray_delays.ravel()
    dep_zen, dep_azi = sub.zod.ravel(), sub.aod.ravel()
    arr_zen, arr_azi = sub.zoa.ravel(), sub.aoa.ravel()
    cl = np.repeat(np.arange(n, dtype=np.int32), m)
    ray = np.tile(np.arange(m, dtype=np.int32), n)
    weights = ray_w
    if sub.has_los:
        delays = np.concatenate([[sub.los_delay], delays])
        dep_zen = np.concatenate([[sub.los_departure.zenith], dep_zen])
        dep_azi = np.concatenate([[sub.los_departure.azimuth], dep_azi])
        arr_zen = np.concatenate([[sub.los_arrival.zenith], arr_zen])
        arr_azi = np.concatenate([[sub.los_arrival.azimuth], arr_azi])
        cl = np.concatenate([[-1], cl]).astype(np.int32)
        ray = np.concatenate([[-1], ray]).astype(np.int32)
        weights = np.concatenate([[math.sqrt(k / (1.0 + k))], weights])

    n_paths = delays.shape[0]
    pmat = _side_matrices(sub, cl, ray, wavelength_m)

    # One-hop Doppler: arrival and departure couplings only.
    units_arr = spherical_unit_vector(DirectionAngles(arr_zen, arr_azi))
    units_dep = spherical_unit_vector(DirectionAngles(dep_zen, dep_azi))
    f_d = (
        units_arr @ rx_node.velocity_mps + units_dep @ tx_node.velocity_mps
    ) / wavelength_m

    scale = 10.0 ** (-(hop.path_loss_db + hop.shadow_fading_db) / 20.0)
    amp = weights * scale
    doppler = np.exp(2j * np.pi * np.outer(f_d, grid.times()))
    time_block = amp[:, None] * doppler

    f_rx = _field_matrix(rx_elements, arr_zen, arr_azi)
    f_tx = _field_matrix(tx_elements, dep_zen, dep_azi)
    ph_rx = _array_phases(rx_elements, arr_zen, arr_azi, wavelength_m)
    ph_tx = _array_phases(tx_elements, dep_zen, dep_azi, wavelength_m)
    scalar = np.einsum("ula,lab,slb->usl", f_rx, pmat, f_tx)
    scalar = scalar * ph_rx[:, None, :] * ph_tx[None, :, :]
    gains = scalar[..., None] * time_block[None, None, ...]

    return TargetChannelCir(
        delays=delays.astype(float),
        gains=gains,
        pair_type=np.full(n_paths, int(PairType.BACKGROUND), np.int8),
        grid=grid,
        case=None,
        condition_pair=hop.condition,
    )


def combine_channels(
    target: TargetChannelCir,
    background: TargetChannelCir | None,
    coupling: CouplingConfig,
) -> TargetChannelCir:
    """Union of target and background paths under the coupling configuration.

    'added' mode scales background amplitudes by sqrt(o_isac); 'embedded'
    mode first removes the weakest removal_fraction of background paths
    (by mean power across antenna pairs and snapshots) and keeps the rest
    unscaled, standing in for an environment response that already contains
    the target's surroundings.
    """
    if background is None:
        return target
    g_t, g_b = target.grid, background.grid
    if (g_t.start_s, g_t.step_s, g_t.count) != (g_b.start_s, g_b.step_s, g_b.count):
        raise ConfigError("snapshot grids of target and background differ")
    if target.gains.shape[:2] != background.gains.shape[:2]:
        raise ConfigError("antenna array sizes of target and background differ")

    bg_gains = background.gains
    bg_delays = background.delays
    bg_types = background.pair_type
    if coupling.mode == "added":
        if coupling.o_isac == 0.0:
            return target
        bg_gains = bg_gains * math.sqrt(coupling.o_isac)
    else:
        n_bg = bg_delays.shape[0]
        n_drop = int(coupling.removal_fraction * n_bg)
        if n_drop > 0:
            mean_power = np.mean(np.abs(bg_gains) ** 2, axis=(0, 1, 3))
            keep = np.sort(np.argsort(mean_power)[n_drop:])
            bg_gains = bg_gains[:, :, keep, :]
            bg_delays = bg_delays[keep]
            bg_types = bg_types[keep]

    return TargetChannelCir(
        delays=np.concatenate([target.delays, bg_delays]),
        gains=np.concatenate([target.gains, bg_gains], axis=2),
        pair_type=np.concatenate([target.pair_type, bg_types]),
        grid=target.grid,
        case=target.case,
        condition_pair=target.condition_pair,
    )
