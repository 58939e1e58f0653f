"""Image I/O plus the blur and resize primitives the mask pipeline rides on.

Conventions used everywhere in this package:

- a color image is a torch tensor of shape (H, W, 3), float64, values in [0, 1]
- a scalar field (mask, single channel) is a torch tensor of shape (H, W)

Blur and resize are plain differentiable torch ops, so fields that require
grad keep their autograd history; this is what lets generated-image masks sit
inside the optimization graph.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimMismatch, InvalidKernel, InvalidSigma, InvalidSize

DTYPE = torch.float64


def validate_image(img: torch.Tensor) -> torch.Tensor:
    """Check the (H, W, 3) in-[0,1] image contract, returning the input."""
    if not isinstance(img, torch.Tensor) or img.ndim != 3 or img.shape[2] != 3:
        raise DimMismatch(f"expected an (H, W, 3) tensor, got {getattr(img, 'shape', type(img))}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise InvalidSize("image must have at least one row and one column")
    if not torch.isfinite(img).all():
        raise DimMismatch("image contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise DimMismatch("image values must lie in [0, 1]")
    return img


def validate_field(field: torch.Tensor) -> torch.Tensor:
    """Check the (H, W) finite scalar-field contract, returning the input."""
    if not isinstance(field, torch.Tensor) or field.ndim != 2:
        raise DimMismatch(f"expected an (H, W) tensor, got {getattr(field, 'shape', type(field))}")
    if not torch.isfinite(field).all():
        raise DimMismatch("field contains non-finite values")
    return field


def load_image(path, max_side: int | None = None) -> torch.Tensor:
    """Load a PNG or JPEG file as an (H, W, 3) float64 tensor in [0, 1].

    If max_side is given and the larger image side exceeds it, the image is
    bilinearly downscaled so the larger side equals max_side, preserving the
    aspect ratio (smaller side rounded, floor 1).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except UnidentifiedImageError as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    except OSError as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    img = torch.from_numpy(arr)
    if max_side is not None:
        h, w = img.shape[0], img.shape[1]
        if max(h, w) > max_side:
            scale = max_side / max(h, w)
            if h >= w:
                out_h, out_w = max_side, max(1, round(w * scale))
            else:
                out_h, out_w = max(1, round(h * scale)), max_side
            img = resize_image(img, out_h, out_w)
    return img


def quantize_u8(values: torch.Tensor) -> np.ndarray:
    """Clamp to [0, 1] and quantize to uint8 with round-half-up."""
    v = values.detach().clamp(0.0, 1.0).cpu().numpy()
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def save_image(img: torch.Tensor, path) -> None:
    """Write an image tensor as an 8-bit RGB PNG.

    Values are clamped to [0, 1] before quantization, so out-of-contract
    inputs (an unclamped optimization variable) degrade gracefully. The parent
    directory must exist; OSError propagates otherwise.
    """
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimMismatch(f"expected an (H, W, 3) tensor, got {img.shape}")
    Image.fromarray(quantize_u8(img), mode="RGB").save(Path(path), format="PNG")


def save_grayscale(field: torch.Tensor, path) -> None:
    """Write a scalar field as an 8-bit grayscale PNG (same quantization rule)."""
    validate_field(field.detach())
    Image.fromarray(quantize_u8(field), mode="L").save(Path(path), format="PNG")


def encode_png(img: torch.Tensor) -> bytes:
    """PNG-encode an image tensor in memory (clamped and quantized as save_image)."""
    import io

    buf = io.BytesIO()
    Image.fromarray(quantize_u8(img), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode_png_bytes(data: bytes) -> torch.Tensor:
    """Decode PNG/JPEG bytes to an image tensor; DecodeError on bad data."""
    import io

    try:
        with Image.open(io.BytesIO(data)) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode uploaded bytes: {exc}") from exc
    return torch.from_numpy(arr)


def gaussian_kernel_2d(kernel_size: int, sigma_px: float) -> torch.Tensor:
    """Normalized 2-D Gaussian kernel (entries sum to 1), float64."""
    if not isinstance(kernel_size, int) or kernel_size < 1 or kernel_size % 2 == 0:
        raise InvalidKernel(f"kernel_size must be an odd integer >= 1, got {kernel_size}")
    if sigma_px <= 0:
        raise InvalidSigma(f"sigma_px must be positive, got {sigma_px}")
    half = (kernel_size - 1) / 2.0
    coords = torch.arange(kernel_size, dtype=DTYPE) - half
    sq = coords[:, None] ** 2 + coords[None, :] ** 2
    kernel = torch.exp(-sq / (2.0 * sigma_px**2))
    return kernel / kernel.sum()


def _replicate_pad(field: torch.Tensor, pad: int) -> torch.Tensor:
    # Clamped-index gather instead of F.pad: works for pads wider than the
    # field and stays differentiable.
    h, w = field.shape
    rows = torch.clamp(torch.arange(-pad, h + pad), 0, h - 1)
    cols = torch.clamp(torch.arange(-pad, w + pad), 0, w - 1)
    return field[rows][:, cols]


def gaussian_blur(field: torch.Tensor, kernel_size: int, sigma_px: float) -> torch.Tensor:
    """Convolve a scalar field with a normalized Gaussian, edge-replicated borders.

    Output has the same (H, W); constant fields pass through unchanged because
    the kernel sums to 1.
    """
    validate_field(field)
    kernel = gaussian_kernel_2d(kernel_size, sigma_px).to(field.dtype)
    pad = kernel_size // 2
    padded = _replicate_pad(field, pad)
    out = F.conv2d(
        padded.reshape(1, 1, *padded.shape),
        kernel.reshape(1, 1, kernel_size, kernel_size),
    )
    return out.reshape(field.shape)


def resize_bilinear(field: torch.Tensor, out_h: int, out_w: int) -> torch.Tensor:
    """Bilinear resize of a scalar field, half-pixel-center alignment.

    Output values stay inside [min(field), max(field)].
    """
    if not isinstance(out_h, int) or not isinstance(out_w, int) or out_h < 1 or out_w < 1:
        raise InvalidSize(f"output dims must be integers >= 1, got {out_h}x{out_w}")
    if field.ndim != 2:
        raise DimMismatch(f"expected an (H, W) tensor, got {field.shape}")
    if (out_h, out_w) == tuple(field.shape):
        return field.clone()
    out = F.interpolate(
        field.reshape(1, 1, *field.shape),
        size=(out_h, out_w),
        mode="bilinear",
        align_corners=False,
    )
    return out.reshape(out_h, out_w)


def resize_image(img: torch.Tensor, out_h: int, out_w: int) -> torch.Tensor:
    """Bilinear resize of an (H, W, 3) image, same convention as resize_bilinear."""
    if not isinstance(out_h, int) or not isinstance(out_w, int) or out_h < 1 or out_w < 1:
        raise InvalidSize(f"output dims must be integers >= 1, got {out_h}x{out_w}")
    if (out_h, out_w) == tuple(img.shape[:2]):
        return img.clone()
    chw = img.permute(2, 0, 1).unsqueeze(0)
    out = F.interpolate(chw, size=(out_h, out_w), mode="bilinear", align_corners=False)
    return out.squeeze(0).permute(1, 2, 0)
