"""Model and input file handling.

Binary model container ("SSNN"): little-endian fixed layout with an
explicit width field and a trailing CRC32, so golden files are bit-exact
across platforms. Kernels are stored in natural (un-rotated) orientation,
c_out-major then c_in, row-major. Inputs come from IDX image files (the
standard MNIST container, big-endian dims) or plain P2/P5 graymaps.
Seeded random model generation uses the shape grammar
"<H>x<W>-<n>C<k>-P3-...-F<n>".
"""

import re
import struct
import zlib
from random import Random

from spikesim.encoder import default_schedule
from spikesim.errors import ModelFormatError, ModelValidationError
from spikesim.fixedpoint import rails
from spikesim.model import Classifier, LayerSpec, NetworkSpec

MAGIC = b"SSNN"
VERSION = 1
IDX_IMAGES_MAGIC = 0x00000803


def save_model(net: NetworkSpec, path: str) -> None:
    net.validate()
    body = bytearray()
    body += MAGIC
    body += struct.pack("<HBBHH", VERSION, net.width, net.timesteps,
                        net.in_height, net.in_width)
    body += struct.pack("<B", len(net.input_thresholds))
    for p in net.input_thresholds:
        body += struct.pack("<i", p)
    body += struct.pack("<B", len(net.layers))
    for layer in net.layers:
        body += struct.pack("<BHHHHBi", layer.kernel_size, layer.in_channels,
                            layer.out_channels, layer.in_height, layer.in_width,
                            int(layer.maxpool), layer.threshold)
        for b in layer.bias:
            body += struct.pack("<i", b)
        for group in layer.kernels:
            for kern in group:
                for row in kern:
                    for w in row:
                        body += struct.pack("<i", w)
    clf = net.classifier
    body += struct.pack("<HI", clf.num_classes, clf.in_features)
    for row in clf.weights:
        for w in row:
            body += struct.pack("<i", w)
    for b in clf.bias:
        body += struct.pack("<i", b)
    body += struct.pack("<I", zlib.crc32(bytes(body)))
    with open(path, "wb") as fh:
        fh.write(bytes(body))


class _Reader:
    def __init__(self, data: bytes, where: str):
        self.data = data
        self.pos = 0
        self.where = where

    def take(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise ModelFormatError(f"{self.where}: truncated while reading {what}")
        values = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return values if len(values) > 1 else values[0]


def load_model(path: str) -> NetworkSpec:
    """Load and fully validate a model file."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8:
        raise ModelFormatError(f"{path}: file too short for a model header")
    payload, (stored_crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(payload) != stored_crc:
        raise ModelFormatError(f"{path}: checksum mismatch")
    r = _Reader(payload, path)
    if r.take("4s", "magic") != MAGIC:
        raise ModelFormatError(f"{path}: bad magic, not a model file")
    version, width, timesteps, in_h, in_w = r.take("<HBBHH", "header")
    if version != VERSION:
        raise ModelFormatError(f"{path}: unsupported version {version}")
    n_thresh = r.take("<B", "threshold count")
    thresholds = tuple(r.take("<i", f"threshold {k}") for k in range(n_thresh))
    n_layers = r.take("<B", "layer count")
    layers = []
    for idx in range(n_layers):
        where = f"{path} layer {idx}"
        ksize, c_in, c_out, h, w, pool, vt = r.take("<BHHHHBi", where)
        if ksize not in (1, 3):
            raise ModelFormatError(f"{where}: kernel size {ksize} not in (1, 3)")
        bias = [r.take("<i", f"{where} bias {c}") for c in range(c_out)]
        kernels = [[[[r.take("<i", f"{where} weight") for _ in range(ksize)]
                     for _ in range(ksize)] for _ in range(c_in)]
                   for _ in range(c_out)]
        layers.append(LayerSpec("conv3x3" if ksize == 3 else "conv1x1",
                                c_in, c_out, h, w, kernels, bias, vt, bool(pool)))
    n_classes, in_features = r.take("<HI", f"{path} classifier header")
    weights = [[r.take("<i", "classifier weight") for _ in range(in_features)]
               for _ in range(n_classes)]
    cbias = [r.take("<i", "classifier bias") for _ in range(n_classes)]
    if r.pos != len(payload):
        raise ModelFormatError(f"{path}: {len(payload) - r.pos} trailing bytes")
    net = NetworkSpec(layers, Classifier(weights, cbias), timesteps,
                      thresholds, width, in_h, in_w)
    net.validate()
    return net


def load_idx_images(path: str) -> list[list[list[int]]]:
    """Read an IDX unsigned-byte image file (MNIST container format)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16:
        raise ModelFormatError(f"{path}: truncated IDX header")
    magic, count, rows, cols = struct.unpack(">IIII", data[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise ModelFormatError(f"{path}: bad IDX magic 0x{magic:08x}")
    need = 16 + count * rows * cols
    if len(data) < need:
        raise ModelFormatError(f"{path}: short read, expected {need} bytes")
    images = []
    pos = 16
    for _ in range(count):
        image = []
        for _ in range(rows):
            image.append(list(data[pos:pos + cols]))
            pos += cols
        images.append(image)
    return images


def load_pgm(path: str) -> list[list[int]]:
    """Read a P2 (ASCII) or P5 (binary) portable graymap."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] not in (b"P2", b"P5"):
        raise ModelFormatError(f"{path}: not a P2/P5 graymap")
    binary = data[:2] == b"P5"
    # Header tokens: magic, width, height, maxval; '#' comments allowed.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ModelFormatError(f"{path}: truncated graymap header")
        tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ModelFormatError(f"{path}: non-numeric graymap header") from exc
    if binary:
        pos += 1  # single whitespace after maxval
        pixels = list(data[pos:pos + width * height])
    else:
        pixels = [int(t) for t in data[pos:].split()]
    if len(pixels) < width * height:
        raise ModelFormatError(f"{path}: graymap pixel data short")
    if any(p > maxval for p in pixels[:width * height]):
        raise ModelFormatError(f"{path}: pixel above maxval")
    return [pixels[r * width:(r + 1) * width] for r in range(height)]


_SHAPE_DIMS = re.compile(r"^(\d+)x(\d+)$")
_SHAPE_CONV = re.compile(r"^(\d+)C([13])$")
_SHAPE_FC = re.compile(r"^F(\d+)$")


def parse_shape(shape: str) -> tuple[int, int, list[tuple[int, int, bool]], int]:
    """Parse "<H>x<W>-<n>C<k>[-P3]...-F<n>" into structural parameters.

    Returns (height, width, [(channels, kernel_size, maxpool)], classes).
    """
    tokens = shape.split("-")
    if len(tokens) < 2:
        raise ModelValidationError(f"shape {shape!r}: need dimensions and a classifier")
    m = _SHAPE_DIMS.match(tokens[0])
    if not m:
        raise ModelValidationError(f"shape {shape!r}: bad dimensions token {tokens[0]!r}")
    height, width = int(m.group(1)), int(m.group(2))
    convs: list[tuple[int, int, bool]] = []
    classes = None
    for tok in tokens[1:]:
        if classes is not None:
            raise ModelValidationError(f"shape {shape!r}: tokens after classifier")
        if tok == "P3":
            if not convs or convs[-1][2]:
                raise ModelValidationError(f"shape {shape!r}: P3 must follow a conv layer")
            ch, k, _ = convs[-1]
            convs[-1] = (ch, k, True)
            continue
        m = _SHAPE_CONV.match(tok)
        if m:
            convs.append((int(m.group(1)), int(m.group(2)), False))
            continue
        m = _SHAPE_FC.match(tok)
        if m:
            classes = int(m.group(1))
            continue
        raise ModelValidationError(f"shape {shape!r}: unknown token {tok!r}")
    if classes is None:
        raise ModelValidationError(f"shape {shape!r}: missing F<n> classifier")
    if not convs:
        raise ModelValidationError(f"shape {shape!r}: needs at least one conv layer")
    return height, width, convs, classes


def random_model(seed: int, shape: str, width: int = 8, timesteps: int = 5,
                 weight_limit: int | None = None, bias_limit: int | None = None,
                 threshold: int | None = None) -> NetworkSpec:
    """Reproducible random network for a shape string."""
    scale = 1 if width == 8 else 32
    if weight_limit is None:
        weight_limit = 20 * scale
    if bias_limit is None:
        bias_limit = 6 * scale
    if threshold is None:
        threshold = 30 * scale
    lo, hi = rails(width)
    if not (lo <= -weight_limit and weight_limit <= hi and threshold <= hi):
        raise ModelValidationError("ranges exceed representable values")

    height, in_width, convs, classes = parse_shape(shape)
    rng = Random(seed)
    layers = []
    h, w, channels = height, in_width, 1
    for out_ch, k, pool in convs:
        kernels = [[[[rng.randint(-weight_limit, weight_limit) for _ in range(k)]
                     for _ in range(k)] for _ in range(channels)]
                   for _ in range(out_ch)]
        bias = [rng.randint(-bias_limit, bias_limit) for _ in range(out_ch)]
        layer = LayerSpec("conv3x3" if k == 3 else "conv1x1", channels, out_ch,
                          h, w, kernels, bias, threshold, pool)
        layers.append(layer)
        channels, h, w = out_ch, layer.out_height, layer.out_width
    features = channels * h * w
    clf = Classifier(
        [[rng.randint(-weight_limit, weight_limit) for _ in range(features)]
         for _ in range(classes)],
        [rng.randint(-bias_limit, bias_limit) for _ in range(classes)])
    net = NetworkSpec(layers, clf, timesteps,
                      default_schedule(timesteps).thresholds, width, height, in_width)
    net.validate()
    return net
