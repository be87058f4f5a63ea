#!/usr/bin/env python3
"""Generates the bundled target images (binary PGM, dark shapes on white)."""
import numpy as np
from pathlib import Path

SIZE = 128
HERE = Path(__file__).resolve().parent


def grid(size=SIZE):
    c = -1 + (2 * np.arange(size) + 1) / size
    x, y = np.meshgrid(c, -c)  # row 0 is the top edge (y = +1)
    return x, y


def ellipse(x, y, cx, cy, ax, ay, angle_deg=0.0):
    a = np.deg2rad(angle_deg)
    dx, dy = x - cx, y - cy
    u = dx * np.cos(a) + dy * np.sin(a)
    v = -dx * np.sin(a) + dy * np.cos(a)
    return (u / ax) ** 2 + (v / ay) ** 2 <= 1.0


def write_pgm(path, gray, maxval=255):
    h, w = gray.shape
    with open(path, "wb") as f:
        f.write(f"P5\n# {path.name}\n{w} {h}\n{maxval}\n".encode())
        f.write(gray.astype(np.uint8).tobytes())


def bunny_head():
    x, y = grid()
    head = ellipse(x, y, 0.0, -0.3, 0.55, 0.45)
    left_ear = ellipse(x, y, -0.26, 0.38, 0.14, 0.42, 12)
    right_ear = ellipse(x, y, 0.26, 0.38, 0.14, 0.42, -12)
    mask = head | left_ear | right_ear
    return np.where(mask, 0, 255)


def two_disks():
    # denser disk (left) is black, lighter disk is mid gray: 2:1 mass after inversion
    x, y = grid()
    dense = ellipse(x, y, -0.4, 0.0, 0.3, 0.3)
    light = ellipse(x, y, 0.4, 0.0, 0.3, 0.3)
    img = np.full(x.shape, 254)
    img[light] = 127
    img[dense] = 0
    return img


def letter_n():
    x, y = grid()
    left = (np.abs(x + 0.5) <= 0.13) & (np.abs(y) <= 0.75)
    right = (np.abs(x - 0.5) <= 0.13) & (np.abs(y) <= 0.75)
    # diagonal stroke from top-left to bottom-right
    d = np.abs(x + y * (0.5 / 0.75)) / np.hypot(1.0, 0.5 / 0.75)
    diag = (d <= 0.12) & (np.abs(y) <= 0.75) & (np.abs(x) <= 0.63)
    return np.where(left | right | diag, 0, 255)


if __name__ == "__main__":
    write_pgm(HERE / "bunny_head.pgm", bunny_head())
    write_pgm(HERE / "two_disks.pgm", two_disks(), maxval=254)
    write_pgm(HERE / "letter_n.pgm", letter_n())
