"""One renderer per figure id.

Each renderer reads its declared CSVs through the strict schema loader
and draws with a fixed style, so the output image depends only on the
CSV contents.
"""

import os

import matplotlib

matplotlib.use("Agg", force=True)
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, grid_from_columns, load_table

_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
}

MAP_INTENSITY = ("x", "y", "intensity")
COVERAGE_FRACTIONS = ("config_id", "metric", "fraction")
LAYOUT_COMPARISON = ("mu", "config_id", "eps", "xi0", "fraction")
LAYOUT_SURFACE = ("eps", "xi0", "fraction")
LENS_SWEEP = ("phi_rad", "aod_exact", "aod_approx")
BER = ("ebn0_db", "ber", "num_bits", "num_errors", "config_id")
MSE = ("x", "y", "z", "sigma_i", "trials", "mse")
CONCENTRATION = ("config_id", "fraction")
REQUIRED_POWER = ("config_id", "metric", "required_power_db")

FIGURE_INPUTS = {
    "fig5_bars": (("layout_comparison.csv", LAYOUT_COMPARISON),),
    "fig6_surface": (("layout_surface.csv", LAYOUT_SURFACE),),
    "fig8_aod": (("lens_sweep.csv", LENS_SWEEP),),
    "fig9_maps": (
        ("map_intensity_threshold.csv", MAP_INTENSITY),
        ("map_intensity_uniformity.csv", MAP_INTENSITY),
    ),
    "fig10_bars": (("coverage_fractions.csv", COVERAGE_FRACTIONS),),
    "fig11_intensity": (
        ("map_intensity_phase1.csv", MAP_INTENSITY),
        ("map_intensity_phase2.csv", MAP_INTENSITY),
        ("concentration.csv", CONCENTRATION),
    ),
    "fig12_ber": (("ber.csv", BER),),
    "fig13_mse": (
        ("mse_directionless.csv", MSE),
        ("mse_directional.csv", MSE),
    ),
    "fig14_power": (("required_power.csv", REQUIRED_POWER),),
}

FIGURE_IDS = tuple(sorted(FIGURE_INPUTS))


def _load(indir, figure_id):
    tables = []
    for filename, columns in FIGURE_INPUTS[figure_id]:
        tables.append(load_table(os.path.join(indir, filename), columns))
    return tables


def _ordered_unique(values):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def _grouped_bars(ax, groups, series, values, ylabel):
    """values[(series, group)] -> grouped bar chart with one bar per series."""
    width = 0.8 / len(series)
    xs = np.arange(len(groups))
    for k, name in enumerate(series):
        offs = xs + (k - (len(series) - 1) / 2) * width
        ax.bar(offs, [values[(name, g)] for g in groups], width, label=name)
    ax.set_xticks(xs)
    ax.set_xticklabels([str(g) for g in groups])
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.grid(axis="x", visible=False)


def _heatmap(ax, table, title):
    xs, ys, Z = grid_from_columns(table["x"], table["y"], table["intensity"])
    im = ax.pcolormesh(xs, ys, Z, shading="nearest", cmap="viridis")
    ax.set_title(title)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal")
    ax.grid(visible=False)
    return im


def _render_fig5_bars(tables, fig):
    (t,) = tables
    series = _ordered_unique(t["config_id"])
    groups = _ordered_unique(int(m) for m in t["mu"])
    values = {
        (c, int(m)): f
        for c, m, f in zip(t["config_id"], t["mu"], t["fraction"])
    }
    ax = fig.subplots()
    _grouped_bars(ax, groups, series, values, "covered area fraction")
    ax.set_xlabel("number of O-APs")
    ax.set_title("Closed-form layout vs grid search")


def _render_fig6_surface(tables, fig):
    (t,) = tables
    eps, xi0, F = grid_from_columns(t["eps"], t["xi0"], t["fraction"])
    ax = fig.subplots()
    # Negative fractions are the sentinel for infeasible layouts (an O-AP
    # would leave the ceiling); mask them out of the color scale.
    im = ax.pcolormesh(
        eps, xi0, np.ma.masked_less(F, 0.0), shading="nearest", cmap="viridis"
    )
    fig.colorbar(im, ax=ax, label="covered area fraction")
    ax.set_xlabel("layout radius (m)")
    ax.set_ylabel("rotation angle (rad)")
    ax.set_title("Coverage over the layout search space")
    ax.grid(visible=False)


def _render_fig8_aod(tables, fig):
    (t,) = tables
    ax = fig.subplots()
    ax.plot(t["phi_rad"], t["aod_exact"], label="exact trace")
    ax.plot(t["phi_rad"], t["aod_approx"], "--", label="small-angle approximation")
    ax.set_xlabel("angle of entry (rad)")
    ax.set_ylabel("angle of departure (rad)")
    ax.set_title("Residual AoD of the off-peak wavelength")
    ax.legend()


def _render_fig9_maps(tables, fig):
    threshold, uniformity = tables
    vmax = max(threshold["intensity"].max(), uniformity["intensity"].max())
    axes = fig.subplots(1, 2)
    for ax, table, title in (
        (axes[0], threshold, "threshold-optimal layout"),
        (axes[1], uniformity, "uniformity layout"),
    ):
        im = _heatmap(ax, table, title)
        im.set_clim(0.0, vmax)
    fig.colorbar(im, ax=list(axes), label="intensity", shrink=0.8)


def _render_fig10_bars(tables, fig):
    (t,) = tables
    series = _ordered_unique(t["config_id"])
    groups = _ordered_unique(t["metric"])
    values = {
        (c, m): f for c, m, f in zip(t["config_id"], t["metric"], t["fraction"])
    }
    ax = fig.subplots()
    _grouped_bars(ax, groups, series, values, "covered area fraction")
    ax.set_xlabel("coverage metric")
    ax.set_title("Coverage by layout and metric")


def _render_fig11_intensity(tables, fig):
    phase1, phase2, conc = tables
    fractions = dict(zip(conc["config_id"], conc["fraction"]))
    axes = fig.subplots(1, 2)
    for ax, table, name in ((axes[0], phase1, "phase1"), (axes[1], phase2, "phase2")):
        im = _heatmap(ax, table, f"{name}: {100 * fractions[name]:.2f}% on target")
        fig.colorbar(im, ax=ax, shrink=0.7)


def _render_fig12_ber(tables, fig):
    (t,) = tables
    ax = fig.subplots()
    for config_id in _ordered_unique(t["config_id"]):
        sel = t["config_id"] == config_id
        ax.semilogy(t["ebn0_db"][sel], t["ber"][sel], marker="o",
                    markersize=3, label=config_id)
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("BER")
    ax.set_title("Bit error rate by phase")
    ax.legend()


def _render_fig13_mse(tables, fig):
    ax = fig.subplots()
    for table, label in zip(tables, ("directionless", "directional")):
        ax.loglog(table["sigma_i"] ** 2, table["mse"], marker="o",
                  markersize=3, label=label)
    ax.set_xlabel("film noise power $\\sigma_I^2$")
    ax.set_ylabel("localization MSE (m$^2$)")
    ax.set_title("Localization error vs sensing noise")
    ax.legend()


def _render_fig14_power(tables, fig):
    (t,) = tables
    series = _ordered_unique(t["config_id"])
    groups = _ordered_unique(t["metric"])
    values = {
        (c, m): p
        for c, m, p in zip(t["config_id"], t["metric"], t["required_power_db"])
    }
    ax = fig.subplots()
    _grouped_bars(ax, groups, series, values, "required transmit power (dB)")
    ax.set_xlabel("target metric (1e-4)")
    ax.set_title("Power needed to hit the service targets")


_RENDERERS = {
    "fig5_bars": _render_fig5_bars,
    "fig6_surface": _render_fig6_surface,
    "fig8_aod": _render_fig8_aod,
    "fig9_maps": _render_fig9_maps,
    "fig10_bars": _render_fig10_bars,
    "fig11_intensity": _render_fig11_intensity,
    "fig12_ber": _render_fig12_ber,
    "fig13_mse": _render_fig13_mse,
    "fig14_power": _render_fig14_power,
}

_WIDE = {"fig9_maps", "fig11_intensity"}


def _save(fig, outfile):
    ext = os.path.splitext(outfile)[1].lower()
    # Strip the format-specific timestamp/version metadata so identical
    # CSVs always produce byte-identical files.
    if ext == ".png":
        metadata = {"Software": "figures"}
    elif ext == ".svg":
        metadata = {"Date": None}
    elif ext == ".pdf":
        metadata = {"CreationDate": None}
    else:
        metadata = None
    fig.savefig(outfile, metadata=metadata)


def render(figure_id, indir, outfile):
    """Render ``figure_id`` from the CSVs in ``indir`` to ``outfile``."""
    if figure_id not in _RENDERERS:
        raise SchemaError(f"unknown figure id '{figure_id}'")
    tables = _load(indir, figure_id)
    with plt.rc_context(_STYLE):
        figsize = (9.0, 4.0) if figure_id in _WIDE else _STYLE["figure.figsize"]
        fig = plt.figure(figsize=figsize, layout="constrained")
        try:
            _RENDERERS[figure_id](tables, fig)
            _save(fig, outfile)
        finally:
            plt.close(fig)
    return outfile
