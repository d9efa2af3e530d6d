"""INI configuration for :class:`~mmwave_ee.model.NetworkParams`.

Sections and keys (all optional; defaults are the model defaults)::

    [network]        lambda_m, lambda_f, p_m, p_f, p_cm, p_cf, eta_m, eta_f,
                     sigma2 (W), ell_w_db, r_f
    [path_loss]      c_los_db, c_nlos_db, alpha_los, alpha_nlos, beta
    [vertical]       enabled, theta_3db, sll_db, h_eff
    [macro_antenna]  tx_main_db, tx_side_db, tx_beamwidth, rx_main_db, rx_side_db, rx_beamwidth
    [femto_antenna]  same keys as macro_antenna
    [fading]         m
    [simulation]     n_drops, seed, window, exact_hole_process

Thresholds and gains are in dB, distances in meters, powers in watts.
"""
from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

from .model import (
    AntennaSpec,
    FadingModel,
    NetworkParams,
    PathLossModel,
    VerticalPattern,
    db_to_linear,
    horizontal_gain_dist_from,
    linear_to_db,
)
from .montecarlo import DropConfig, default_seed


class ConfigError(ValueError):
    """Bad configuration; the message names the file and line when known."""


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


_ANTENNA_KEYS = {
    "tx_main_db": float, "tx_side_db": float, "tx_beamwidth": float,
    "rx_main_db": float, "rx_side_db": float, "rx_beamwidth": float,
}

SCHEMA: dict[str, dict[str, type]] = {
    "network": {
        "lambda_m": float, "lambda_f": float, "p_m": float, "p_f": float, "p_cm": float,
        "p_cf": float, "eta_m": float, "eta_f": float, "sigma2": float, "ell_w_db": float,
        "r_f": float,
    },
    "path_loss": {"c_los_db": float, "c_nlos_db": float, "alpha_los": float,
                  "alpha_nlos": float, "beta": float},
    "vertical": {"enabled": _bool, "theta_3db": float, "sll_db": float, "h_eff": float},
    "macro_antenna": dict(_ANTENNA_KEYS),
    "femto_antenna": dict(_ANTENNA_KEYS),
    "fading": {"m": int},
    "simulation": {"n_drops": int, "seed": int, "window": float, "exact_hole_process": _bool},
}


def _defaults() -> dict[str, dict[str, object]]:
    net = NetworkParams()
    pl, vp = net.path_loss, VerticalPattern()
    antenna = {"tx_main_db": 10.0, "tx_side_db": -10.0, "tx_beamwidth": 30.0,
               "rx_main_db": 10.0, "rx_side_db": -10.0, "rx_beamwidth": 90.0}
    return {
        "network": {
            "lambda_m": net.lambda_m, "lambda_f": net.lambda_f, "p_m": net.p_m, "p_f": net.p_f,
            "p_cm": net.p_cm, "p_cf": net.p_cf, "eta_m": net.eta_m, "eta_f": net.eta_f,
            "sigma2": net.sigma2, "ell_w_db": float(linear_to_db(net.ell_w)), "r_f": net.r_f,
        },
        "path_loss": {"c_los_db": float(linear_to_db(pl.c_los)),
                      "c_nlos_db": float(linear_to_db(pl.c_nlos)),
                      "alpha_los": pl.alpha_los, "alpha_nlos": pl.alpha_nlos,
                      "beta": pl.beta_blockage},
        "vertical": {"enabled": True, "theta_3db": vp.theta_3db, "sll_db": vp.sll_db,
                     "h_eff": vp.h_eff},
        "macro_antenna": dict(antenna),
        "femto_antenna": dict(antenna),
        "fading": {"m": 1},
        "simulation": {"n_drops": 10_000, "seed": default_seed(), "window": 0.0,
                       "exact_hole_process": True},
    }


@dataclass
class Config:
    """Resolved key/value settings plus where each came from."""

    values: dict[str, dict[str, object]] = field(default_factory=_defaults)
    origin: dict[tuple[str, str], str] = field(default_factory=dict)

    def set(self, section: str, key: str, text: str, where: str = "override") -> None:
        if section not in SCHEMA:
            raise ConfigError(f"{where}: unknown section [{section}]")
        if key not in SCHEMA[section]:
            known = ", ".join(sorted(SCHEMA[section]))
            raise ConfigError(f"{where}: unknown key {key!r} in [{section}] (known: {known})")
        try:
            value = SCHEMA[section][key](text)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {section}.{key}: {exc}") from None
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"{where}: {section}.{key} must be finite")
        self.values[section][key] = value
        self.origin[(section, key)] = where

    def apply_overrides(self, items) -> None:
        """Apply ``section.key=value`` strings (command-line ``--set``)."""
        for item in items or ():
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise ConfigError(f"override {item!r} is not of the form section.key=value")
            lhs, rhs = item.split("=", 1)
            section, key = lhs.strip().split(".", 1)
            self.set(section, key, rhs.strip(), where=f"--set {item}")

    def flat(self) -> list[tuple[str, object]]:
        return [(f"{s}.{k}", v) for s in SCHEMA for k, v in sorted(self.values[s].items())]

    def digest(self) -> str:
        """Short hash of the resolved settings, stable across runs."""
        text = "\n".join(f"{k}={v!r}" for k, v in self.flat())
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def _where(self, section, key):
        return self.origin.get((section, key), "default")

    def network(self) -> NetworkParams:
        v = self.values
        try:
            net, pl, vert = v["network"], v["path_loss"], v["vertical"]
            macro, femto = v["macro_antenna"], v["femto_antenna"]

            def spec(a, side):
                return AntennaSpec(a[f"{side}_main_db"], a[f"{side}_side_db"],
                                   a[f"{side}_beamwidth"])

            m_tx, m_rx = spec(macro, "tx"), spec(macro, "rx")
            f_tx, f_rx = spec(femto, "tx"), spec(femto, "rx")
            return NetworkParams(
                lambda_m=net["lambda_m"], lambda_f=net["lambda_f"], p_m=net["p_m"],
                p_f=net["p_f"], p_cm=net["p_cm"], p_cf=net["p_cf"], eta_m=net["eta_m"],
                eta_f=net["eta_f"], sigma2=net["sigma2"],
                ell_w=float(db_to_linear(net["ell_w_db"])), r_f=net["r_f"],
                macro_gain=horizontal_gain_dist_from(m_tx, m_rx),
                femto_gain=horizontal_gain_dist_from(f_tx, f_rx),
                cross_fm_gain=horizontal_gain_dist_from(f_tx, m_rx),
                cross_mf_gain=horizontal_gain_dist_from(m_tx, f_rx),
                path_loss=PathLossModel(
                    c_los=float(db_to_linear(pl["c_los_db"])),
                    c_nlos=float(db_to_linear(pl["c_nlos_db"])),
                    alpha_los=pl["alpha_los"], alpha_nlos=pl["alpha_nlos"],
                    beta_blockage=pl["beta"],
                ),
                vertical=VerticalPattern(vert["theta_3db"], vert["sll_db"], vert["h_eff"])
                if vert["enabled"] else None,
                fading=FadingModel(v["fading"]["m"]),
            )
        except ValueError as exc:
            sources = sorted({w for w in self.origin.values()})
            hint = f" (settings from: {', '.join(sources)})" if sources else ""
            raise ConfigError(f"invalid parameters: {exc}{hint}") from None

    def drop(self, scenario: str = "homogeneous", n_drops: int | None = None,
             seed: int | None = None) -> DropConfig:
        sim = self.values["simulation"]
        try:
            return DropConfig(
                n_drops=n_drops if n_drops is not None else sim["n_drops"],
                rng_seed=seed if seed is not None else sim["seed"],
                scenario=scenario,
                exact_hole_process=sim["exact_hole_process"],
                window_radius=sim["window"] or None,
            )
        except ValueError as exc:
            raise ConfigError(f"invalid simulation settings: {exc}") from None


def _line_numbers(text: str) -> dict[tuple[str, str], int]:
    """Map (section, key) to the 1-based line where the key is set."""
    out: dict[tuple[str, str], int] = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        for sep in ("=", ":"):
            if sep in line:
                out[(section, line.split(sep, 1)[0].strip().lower())] = no
                break
    return out


def load_config(path: str | Path | None = None, overrides=None) -> Config:
    """Read an INI file (optional) and ``section.key=value`` overrides."""
    cfg = Config()
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}".replace("\n", " ")) from None
        lines = _line_numbers(text)
        for section in parser.sections():
            if section not in SCHEMA:
                no = next((n for (s, _), n in lines.items() if s == section), "?")
                raise ConfigError(f"{path}:{no}: unknown section [{section}]")
            for key, value in parser.items(section):
                cfg.set(section, key, value, where=f"{path}:{lines.get((section, key), '?')}")
    cfg.apply_overrides(overrides)
    return cfg


def header_lines(cfg: Config) -> list[str]:
    """``key=value`` lines of the full resolved configuration plus its hash."""
    return [f"config_hash={cfg.digest()}"] + [f"{k}={v}" for k, v in cfg.flat()]
