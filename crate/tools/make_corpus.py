#!/usr/bin/env python3
"""Regenerate the synthetic test corpus under corpus/.

All media are produced procedurally from fixed seeds, so they carry no
third-party copyright. Images are 8-bit binary PGM (P5), speech clips are
16-bit little-endian mono PCM WAV with the canonical 44-byte header.
"""
import os
import struct

import numpy as np
from scipy import ndimage, signal

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "corpus")


def write_pgm(path, img):
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(img.astype(np.uint8).tobytes())


def write_wav(path, pcm, rate):
    data = pcm.astype("<i2").tobytes()
    with open(path, "wb") as f:
        f.write(b"RIFF")
        f.write(struct.pack("<I", 36 + len(data)))
        f.write(b"WAVEfmt ")
        f.write(struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16))
        f.write(b"data")
        f.write(struct.pack("<I", len(data)))
        f.write(data)


def to_u8(x):
    x = (x - x.min()) / (x.max() - x.min())
    return np.clip(np.round(x * 255.0), 0, 255).astype(np.uint8)


def scene(n, rng):
    """Outdoor-like scene: sky gradient, hills, a house and a sun."""
    y, x = np.mgrid[0:n, 0:n] / n
    img = 0.75 - 0.35 * y
    hill = 0.55 + 0.08 * np.sin(6.0 * x + 0.5) + 0.04 * np.sin(17.0 * x)
    img = np.where(y > hill, 0.25 + 0.2 * (y - hill) + 0.05 * np.sin(40 * x) * (y - hill), img)
    sun = (x - 0.78) ** 2 + (y - 0.2) ** 2 < 0.008
    img = np.where(sun, 0.98, img)
    house = (x > 0.18) & (x < 0.42) & (y > 0.48) & (y < 0.78)
    img = np.where(house, 0.55, img)
    roof = (y > 0.36) & (y <= 0.48) & (np.abs(x - 0.30) < (y - 0.36) * 1.1)
    img = np.where(roof, 0.12, img)
    door = (x > 0.27) & (x < 0.33) & (y > 0.63) & (y < 0.78)
    img = np.where(door, 0.05, img)
    img = ndimage.gaussian_filter(img, 0.8)
    img += 0.012 * ndimage.gaussian_filter(rng.standard_normal((n, n)), 0.7)
    return to_u8(img)


def portrait(n, rng):
    """Soft-lit face-like shape over a textured background."""
    y, x = np.mgrid[0:n, 0:n] / n
    field = rng.standard_normal((n, n))
    spec = np.fft.fft2(field)
    fy = np.fft.fftfreq(n)[:, None]
    fx = np.fft.fftfreq(n)[None, :]
    f = np.sqrt(fx ** 2 + fy ** 2)
    f[0, 0] = 1.0
    background = np.real(np.fft.ifft2(spec / f ** 1.6))
    background = (background - background.mean()) / background.std()
    img = 0.4 + 0.08 * background
    face = ((x - 0.5) / 0.26) ** 2 + ((y - 0.52) / 0.34) ** 2
    shade = 0.85 - 0.35 * (x - 0.35)
    img = np.where(face < 1.0, shade - 0.15 * face, img)
    for ex in (0.41, 0.59):
        eye = ((x - ex) / 0.045) ** 2 + ((y - 0.45) / 0.025) ** 2 < 1.0
        img = np.where(eye, 0.1, img)
    mouth = (np.abs(x - 0.5) < 0.08) & (np.abs(y - 0.68 - 0.3 * (x - 0.5) ** 2) < 0.012)
    img = np.where(mouth, 0.2, img)
    hair = (face < 1.25) & (face >= 1.0) & (y < 0.5)
    img = np.where(hair, 0.08 + 0.05 * np.sin(80 * x), img)
    img = ndimage.gaussian_filter(img, 0.9)
    img += 0.01 * rng.standard_normal((n, n))
    return to_u8(img)


def formant_filter(source, formants, rate):
    out = source
    for freq, bw in formants:
        r = np.exp(-np.pi * bw / rate)
        theta = 2 * np.pi * freq / rate
        a = [1.0, -2.0 * r * np.cos(theta), r * r]
        # Unity gain at DC, as in a cascade formant synthesizer.
        out = signal.lfilter([sum(a)], a, out)
    return out


def utterance(rate, duration, f0_track, formant_tracks, rng, onset_noise=0.0):
    n = int(rate * duration)
    t = np.arange(n) / rate
    f0 = np.interp(t, np.linspace(0, duration, len(f0_track)), f0_track)
    phase = np.cumsum(2 * np.pi * f0 / rate)
    pulses = (np.diff(np.floor(phase / (2 * np.pi)), prepend=0) > 0).astype(float)
    glottal = signal.lfilter([1.0], [1.0, -0.97], pulses)
    out = np.zeros(n)
    frame = 160
    for start in range(0, n, frame):
        stop = min(n, start + frame)
        pos = start / n
        formants = [
            (np.interp(pos, np.linspace(0, 1, len(track)), track), bw)
            for track, bw in formant_tracks
        ]
        seg = glottal[max(0, start - 400):stop]
        filt = formant_filter(seg, formants, rate)
        out[start:stop] = filt[-(stop - start):]
    env = np.minimum(1.0, t / 0.05) * np.minimum(1.0, (duration - t) / 0.12)
    env = np.clip(env, 0, 1) ** 1.5
    out = out * env
    if onset_noise > 0:
        burst = rng.standard_normal(n) * np.exp(-t / 0.03) * onset_noise
        out = out + signal.lfilter([1, -0.9], [1.0], burst)
    out += 0.002 * rng.standard_normal(n)
    out = out / np.abs(out).max() * 0.6
    return np.round(out * 32767).astype(np.int16)


def main():
    os.makedirs(OUT, exist_ok=True)
    rng = np.random.default_rng(20080101)
    write_pgm(os.path.join(OUT, "scene.pgm"), scene(128, rng))
    write_pgm(os.path.join(OUT, "portrait.pgm"), portrait(128, rng))
    rate = 8000
    one = utterance(
        rate, 0.6, [125, 135, 120, 100],
        [([300, 600, 650, 400], 90), ([700, 1150, 1200, 1500], 110), ([2300, 2400, 2500, 2500], 160)],
        rng,
    )
    two = utterance(
        rate, 0.55, [140, 150, 130, 110],
        [([350, 320, 300, 300], 90), ([1500, 1100, 900, 850], 110), ([2600, 2400, 2300, 2300], 160)],
        rng, onset_noise=0.8,
    )
    write_wav(os.path.join(OUT, "one.wav"), one, rate)
    write_wav(os.path.join(OUT, "two.wav"), two, rate)


if __name__ == "__main__":
    main()
