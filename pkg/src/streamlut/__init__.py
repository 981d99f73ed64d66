"""streamlut: streaming video quality enhancement with sampled look-up tables.

Small convolutional networks are trained once, then exhaustively enumerated
over their quantized input lattices into three tables (one spatial, two
temporal).  At inference each output pixel costs a handful of table reads
and a simplex interpolation instead of a network forward pass, which is what
makes per-frame enhancement cheap enough to run inside a streaming budget.
The engine is strictly online: frame i is enhanced using only frames 0..i,
with features and enhanced planes of past frames reused from a bounded
cache.

Typical use::

    from streamlut import load_weights, load_luts, Engine, EngineConfig

    weights = load_weights("weights.stwt")
    engine = Engine(weights, load_luts("luts/"), EngineConfig(window=7))
    enhanced = engine.process(y_plane, qp=37, frame_index=0)

or, end to end over raw video, via the command line front end::

    streamlut enhance --input in.yuv --sidecar in.txt \\
        --weights weights.stwt --luts luts/ --out out.yuv

Submodules: ``nn`` (conv kernels, weights container/file), ``quant``
(step-size quantization, index split), ``lut`` (tables, simplex queries,
table file), ``propagation`` (reference window), ``alignment`` (offset
prediction, deformable gather), ``enhancement`` (residual paths, fusion,
table building), ``video_io`` (raw YUV + sidecar), ``metrics`` (PSNR/SSIM),
``pipeline`` (frame loop, benchmark), ``cli``.
"""

from .alignment import BASE_GRID, bilinear_sample, deform, predict_offsets
from .enhancement import (
    EnhancementNet,
    NET_DIMS,
    NET_KINDS,
    build_all_luts,
    enhance_direct,
    fuse,
    input_scales_for,
    s_patterns,
    slut_query,
    spatial_complement,
    t1_patterns,
    t2_pattern,
    tlut1_query,
    tlut2_query,
    upsample3,
)
from .errors import (
    BadMagicError,
    BadVersionError,
    ConfigError,
    DataError,
    DuplicateNameError,
    FormatError,
    NumericError,
    StreamLutError,
    TruncatedFileError,
    UsageError,
)
from .lut import (
    LUT_FILENAMES,
    LookupTable,
    LutSpec,
    build_lut,
    load_lut,
    load_luts,
    lut_size_bytes,
    query_simplex,
    save_lut,
)
from .metrics import psnr, ssim
from .nn import (
    ConvSpec,
    WeightStore,
    conv2d,
    downsample2x,
    load_weights,
    mafe_forward,
    pixel_shuffle,
    pixel_unshuffle,
    relu,
    save_weights,
)
from .pipeline import (
    Engine,
    EngineConfig,
    LatencyReport,
    bench,
    enhance_stream,
    quant_params_from_weights,
)
from .propagation import CacheEntry, ReferenceWindow, bootstrap_refs
from .quant import (
    VALID_INTERVALS,
    QuantParams,
    dequantize,
    index_split,
    quantize,
    round_half_away,
)
from .video_io import (
    StreamHeader,
    encode_y,
    read_sidecar,
    read_stream,
    write_sidecar,
    write_stream,
)

__version__ = "0.1.0"
