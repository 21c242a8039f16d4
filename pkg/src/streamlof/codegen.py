"""Bake a trained model into portable C for firmware integration.

Emits one self-contained C99 translation unit plus a matching header: the
model arrays as ROM-placeable constants (32-bit floats, the deployment
width), a scoring function mirroring the host scorer exactly, and optionally
a feature-extraction function mirroring the host DSP stage. No dynamic
allocation, no I/O, nothing beyond <math.h>. Emission is byte-deterministic:
the same model and options always produce the same files.

Symbol naming scheme: <prefix>_{points,k_dist,lrd,lof_score,extract_features}.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .dsp import DspConfig, feature_layout
from .errors import ConfigError
from .lof import LofModel, model_storage_bytes

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class EmitOptions:
    symbol_prefix: str = "anomaly"
    float_width: int = 32
    include_dsp: bool = False
    banner: str = ""

    def __post_init__(self):
        if not _IDENT_RE.match(self.symbol_prefix):
            raise ConfigError(
                f"symbol prefix {self.symbol_prefix!r} is not a valid C identifier"
            )
        if self.float_width != 32:
            raise ConfigError("only 32-bit float emission is supported")


@dataclass(frozen=True)
class CSources:
    source: str
    header: str
    basename: str


def _c_float(value: float) -> str:
    text = f"{float(np.float32(value)):.9g}"
    if "e" not in text and "." not in text:
        text += ".0"
    return text + "f"


def _banner_comment(banner: str) -> str:
    if not banner:
        return ""
    safe = banner.replace("*/", "* /")
    return "/* " + safe + " */\n"


def _array_rows(values, per_line: int = 4) -> list[str]:
    items = [_c_float(v) for v in values]
    return [
        ", ".join(items[i : i + per_line]) for i in range(0, len(items), per_line)
    ]


def _points_initializer(points: np.ndarray) -> str:
    rows = []
    for row in points:
        body = ",\n     ".join(_array_rows(row, per_line=4))
        rows.append("    {" + body + "}")
    return ",\n".join(rows)


def _vector_initializer(values: np.ndarray) -> str:
    return ",\n    ".join(_array_rows(values, per_line=4))


def emit_c_model(
    model: LofModel, dsp: DspConfig | None, opts: EmitOptions
) -> CSources:
    """Generate the C source and header embedding ``model``.

    When ``opts.include_dsp`` is set, ``dsp`` must be given and its feature
    dimension must match the model's.
    """
    if opts.include_dsp:
        if dsp is None:
            raise ConfigError("include_dsp requires a DSP configuration")
        if dsp.dim != model.dim:
            raise ConfigError(
                f"DSP feature dimension {dsp.dim} does not match model "
                f"dimension {model.dim}"
            )
    p = opts.symbol_prefix
    u = p.upper()
    basename = f"{p}_model"
    header = _emit_header(model, dsp, opts, p, u, basename)
    source = _emit_source(model, dsp, opts, p, u, basename)
    return CSources(source=source, header=header, basename=basename)


def _emit_header(model, dsp, opts, p, u, basename) -> str:
    guard = f"{u}_MODEL_H"
    lines = [_banner_comment(opts.banner)] if opts.banner else []
    lines += [
        f"#ifndef {guard}",
        f"#define {guard}",
        "",
        f"#define {u}_POINT_COUNT {model.n_points}",
        f"#define {u}_FEATURE_DIM {model.dim}",
        f"#define {u}_MIN_PTS {model.params.min_pts}",
        f"#define {u}_DIST_FLOOR {_c_float(model.params.zero_dist_floor)}",
    ]
    if opts.include_dsp:
        lines += [
            f"#define {u}_WINDOW_LEN {dsp.window_len}",
            f"#define {u}_CHANNELS {dsp.channels}",
        ]
        if dsp.peaks_enabled:
            lines.append(f"#define {u}_FFT_PEAKS {dsp.fft_peaks}")
    lines += [
        "",
        f"extern const float {p}_points[{u}_POINT_COUNT][{u}_FEATURE_DIM];",
        f"extern const float {p}_k_dist[{u}_POINT_COUNT];",
        f"extern const float {p}_lrd[{u}_POINT_COUNT];",
        "",
        "/* LOF novelty score of one pre-extracted feature vector. */",
        f"float {p}_lof_score(const float *features);",
    ]
    if opts.include_dsp:
        lines += [
            "",
            f"/* Feature extraction over a caller-supplied window buffer of",
            f" * {u}_WINDOW_LEN * {u}_CHANNELS floats, sample-major layout",
            f" * (window[i * {u}_CHANNELS + c]). Writes {u}_FEATURE_DIM floats. */",
            f"void {p}_extract_features(const float *window, float *features);",
        ]
    lines += ["", f"#endif /* {guard} */", ""]
    return "\n".join(lines)


def _emit_score_fn(p, u) -> list[str]:
    return [
        f"float {p}_lof_score(const float *features)",
        "{",
        f"    float nn_dist[{u}_MIN_PTS];",
        f"    int nn_idx[{u}_MIN_PTS];",
        "    int found = 0;",
        "    int i;",
        f"    for (i = 0; i < {u}_POINT_COUNT; ++i) {{",
        "        float acc = 0.0f;",
        "        float dist;",
        "        int pos;",
        "        int f;",
        f"        for (f = 0; f < {u}_FEATURE_DIM; ++f) {{",
        f"            float diff = features[f] - {p}_points[i][f];",
        "            acc += diff * diff;",
        "        }",
        "        dist = sqrtf(acc);",
        f"        if (found < {u}_MIN_PTS) {{",
        "            pos = found;",
        "            found++;",
        f"        }} else if (dist < nn_dist[{u}_MIN_PTS - 1]) {{",
        f"            pos = {u}_MIN_PTS - 1;",
        "        } else {",
        "            continue;",
        "        }",
        "        nn_dist[pos] = dist;",
        "        nn_idx[pos] = i;",
        "        while (pos > 0 && nn_dist[pos] < nn_dist[pos - 1]) {",
        "            float td = nn_dist[pos];",
        "            int ti = nn_idx[pos];",
        "            nn_dist[pos] = nn_dist[pos - 1];",
        "            nn_idx[pos] = nn_idx[pos - 1];",
        "            nn_dist[pos - 1] = td;",
        "            nn_idx[pos - 1] = ti;",
        "            pos--;",
        "        }",
        "    }",
        "    {",
        "        float reach_sum = 0.0f;",
        "        float lrd_sum = 0.0f;",
        "        float lrd_q;",
        "        int c;",
        f"        for (c = 0; c < {u}_MIN_PTS; ++c) {{",
        "            int j = nn_idx[c];",
        "            float rd = nn_dist[c];",
        f"            if ({p}_k_dist[j] > rd) {{",
        f"                rd = {p}_k_dist[j];",
        "            }",
        f"            if (rd < {u}_DIST_FLOOR) {{",
        f"                rd = {u}_DIST_FLOOR;",
        "            }",
        "            reach_sum += rd;",
        f"            lrd_sum += {p}_lrd[j];",
        "        }",
        f"        lrd_q = (float){u}_MIN_PTS / reach_sum;",
        f"        return lrd_sum / ((float){u}_MIN_PTS * lrd_q);",
        "    }",
        "}",
    ]


def _emit_dsp_fn(p, u, dsp: DspConfig) -> list[str]:
    scalars = dsp.enabled_scalars
    need_minmax = "min" in scalars or "max" in scalars
    need_sum = "std" in scalars
    need_sumsq = "rms" in scalars
    peaks = dsp.peaks_enabled
    half = dsp.window_len // 2

    lines = [
        f"void {p}_extract_features(const float *window, float *features)",
        "{",
        "    int out = 0;",
        "    int c;",
    ]
    if peaks:
        lines += [
            f"    float re[{u}_WINDOW_LEN];",
            f"    float im[{u}_WINDOW_LEN];",
            f"    float peak_mag[{u}_FFT_PEAKS];",
            f"    int peak_bin[{u}_FFT_PEAKS];",
        ]
    lines += [
        f"    for (c = 0; c < {u}_CHANNELS; ++c) {{",
        "        int i;",
    ]
    if need_minmax:
        lines.append("        float mn = window[c];")
        lines.append("        float mx = window[c];")
    if need_sum:
        lines.append("        float sum = 0.0f;")
    if need_sumsq:
        lines.append("        float sumsq = 0.0f;")
    if need_minmax or need_sum or need_sumsq:
        lines += [
            f"        for (i = 0; i < {u}_WINDOW_LEN; ++i) {{",
            f"            float v = window[i * {u}_CHANNELS + c];",
        ]
        if need_minmax:
            lines += [
                "            if (v < mn) {",
                "                mn = v;",
                "            }",
                "            if (v > mx) {",
                "                mx = v;",
                "            }",
            ]
        if need_sum:
            lines.append("            sum += v;")
        if need_sumsq:
            lines.append("            sumsq += v * v;")
        lines.append("        }")
    for name in scalars:
        if name == "min":
            lines.append("        features[out++] = mn;")
        elif name == "max":
            lines.append("        features[out++] = mx;")
        elif name == "std":
            lines += [
                "        {",
                f"            float mean = sum / (float){u}_WINDOW_LEN;",
                "            float var = 0.0f;",
                f"            for (i = 0; i < {u}_WINDOW_LEN; ++i) {{",
                f"                float dv = window[i * {u}_CHANNELS + c] - mean;",
                "                var += dv * dv;",
                "            }",
                f"            var /= (float){u}_WINDOW_LEN;",
                "            features[out++] = sqrtf(var);",
                "        }",
            ]
        else:
            lines.append(
                f"        features[out++] = sqrtf(sumsq / (float){u}_WINDOW_LEN);"
            )
    if peaks:
        lines += [
            "        {",
            "            int j = 0;",
            "            int len;",
            "            int b;",
            "            int pp;",
            f"            for (i = 0; i < {u}_WINDOW_LEN; ++i) {{",
            f"                re[i] = window[i * {u}_CHANNELS + c];",
            "                im[i] = 0.0f;",
            "            }",
            f"            for (i = 1; i < {u}_WINDOW_LEN; ++i) {{",
            f"                int bit = {u}_WINDOW_LEN >> 1;",
            "                while (j & bit) {",
            "                    j ^= bit;",
            "                    bit >>= 1;",
            "                }",
            "                j |= bit;",
            "                if (i < j) {",
            "                    float tmp = re[i];",
            "                    re[i] = re[j];",
            "                    re[j] = tmp;",
            "                }",
            "            }",
            f"            for (len = 2; len <= {u}_WINDOW_LEN; len <<= 1) {{",
            "                int half_len = len >> 1;",
            "                float ang = -6.28318530717958648f / (float)len;",
            "                int start;",
            f"                for (start = 0; start < {u}_WINDOW_LEN; start += len) {{",
            "                    int k;",
            "                    for (k = 0; k < half_len; ++k) {",
            "                        float wr = cosf(ang * (float)k);",
            "                        float wi = sinf(ang * (float)k);",
            "                        int i0 = start + k;",
            "                        int i1 = i0 + half_len;",
            "                        float tr = re[i1] * wr - im[i1] * wi;",
            "                        float ti = re[i1] * wi + im[i1] * wr;",
            "                        re[i1] = re[i0] - tr;",
            "                        im[i1] = im[i0] - ti;",
            "                        re[i0] += tr;",
            "                        im[i0] += ti;",
            "                    }",
            "                }",
            "            }",
            f"            for (pp = 0; pp < {u}_FFT_PEAKS; ++pp) {{",
            "                peak_mag[pp] = 0.0f;",
            "                peak_bin[pp] = 0;",
            "            }",
            f"            for (b = 1; b <= {half}; ++b) {{",
            "                float mag = sqrtf(re[b] * re[b] + im[b] * im[b]);",
            f"                if (mag > peak_mag[{u}_FFT_PEAKS - 1]) {{",
            f"                    int pos = {u}_FFT_PEAKS - 1;",
            "                    peak_mag[pos] = mag;",
            "                    peak_bin[pos] = b;",
            "                    while (pos > 0 && peak_mag[pos] > peak_mag[pos - 1]) {",
            "                        float tm = peak_mag[pos];",
            "                        int tb = peak_bin[pos];",
            "                        peak_mag[pos] = peak_mag[pos - 1];",
            "                        peak_bin[pos] = peak_bin[pos - 1];",
            "                        peak_mag[pos - 1] = tm;",
            "                        peak_bin[pos - 1] = tb;",
            "                        pos--;",
            "                    }",
            "                }",
            "            }",
            f"            for (pp = 0; pp < {u}_FFT_PEAKS; ++pp) {{",
            f"                features[out++] = (float)peak_bin[pp] / (float){half};",
            "                features[out++] = peak_mag[pp];",
            "            }",
            "        }",
        ]
    lines += ["    }", "}"]
    return lines


def _emit_source(model, dsp, opts, p, u, basename) -> str:
    pieces = []
    if opts.banner:
        pieces.append(_banner_comment(opts.banner))
    pieces.append(
        "/* Generated model: do not edit by hand. Constant arrays are\n"
        " * ROM-placeable; the scorer is reentrant, allocation-free and\n"
        " * depends only on <math.h>. */\n"
    )
    pieces.append(f'#include "{basename}.h"\n')
    pieces.append("#include <math.h>\n")
    pieces.append("")
    pieces.append(
        f"const float {p}_points[{u}_POINT_COUNT][{u}_FEATURE_DIM] = {{\n"
        + _points_initializer(model.points)
        + "\n};\n"
    )
    pieces.append(
        f"const float {p}_k_dist[{u}_POINT_COUNT] = {{\n    "
        + _vector_initializer(model.k_dist)
        + "\n};\n"
    )
    pieces.append(
        f"const float {p}_lrd[{u}_POINT_COUNT] = {{\n    "
        + _vector_initializer(model.lrd)
        + "\n};\n"
    )
    pieces.append("\n".join(_emit_score_fn(p, u)) + "\n")
    if opts.include_dsp:
        pieces.append("")
        pieces.append("\n".join(_emit_dsp_fn(p, u, dsp)) + "\n")
    return "\n".join(pieces)


def emit_manifest(
    model: LofModel, opts: EmitOptions, dsp: DspConfig | None = None
) -> str:
    """Human-readable summary shipped beside the generated source."""
    kappa = model.params.min_pts
    bytes_ = model_storage_bytes(model.n_points, model.dim, kappa)
    lines = [
        "LOF model manifest",
        "==================",
        f"symbol prefix    : {opts.symbol_prefix}",
        f"points (m)       : {model.n_points}",
        f"feature dim (d)  : {model.dim}",
        f"min_pts          : {kappa}",
        f"dist floor       : {model.params.zero_dist_floor:g}",
        f"model bytes      : {bytes_} "
        "(float32 points/k_dist/lrd + uint16 neighbour indexes)",
        "",
        "feature layout:",
    ]
    if dsp is not None and dsp.dim == model.dim:
        names = feature_layout(dsp)
    else:
        names = [f"feature_{i} (caller-defined)" for i in range(model.dim)]
    for i, name in enumerate(names):
        lines.append(f"  [{i:3d}] {name}")
    lines.append("")
    return "\n".join(lines)
