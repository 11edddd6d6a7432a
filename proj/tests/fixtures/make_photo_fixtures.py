#!/usr/bin/env python3
# Copyright 2026 The CAPad Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the natural-photo fixture corpora under tests/fixtures/photos.

Training and held-out crops come from disjoint source photographs shipped
with scikit-image, scikit-learn and matplotlib (public domain / CC0).
"""
import os

import numpy as np
from PIL import Image
from skimage import data
from sklearn.datasets import load_sample_images
import matplotlib
import matplotlib.image as mpimg

HERE = os.path.dirname(os.path.abspath(__file__))


def crops(img, n, size, rng):
    h, w = img.shape[:2]
    out = []
    for _ in range(n):
        y = int(rng.integers(0, h - size + 1))
        x = int(rng.integers(0, w - size + 1))
        out.append(img[y:y + size, x:x + size, :3])
    return out


def write(dirname, images):
    path = os.path.join(HERE, "photos", dirname)
    os.makedirs(path, exist_ok=True)
    for i, im in enumerate(images):
        Image.fromarray(np.ascontiguousarray(im).astype(np.uint8)).save(
            os.path.join(path, f"{dirname}_{i:03d}.png"))


def main():
    rng = np.random.default_rng(20240531)
    train_src = [data.astronaut(), data.chelsea(), data.coffee(), data.rocket(),
                 data.motorcycle_left() if hasattr(data, "motorcycle_left")
                 else np.asarray(Image.open(os.path.join(
                     os.path.dirname(data.__file__), "motorcycle_left.png")))]
    sk = load_sample_images().images
    hopper = mpimg.imread(os.path.join(matplotlib.get_data_path(),
                                       "sample_data", "grace_hopper.jpg"))
    eval_src = [sk[0], sk[1], hopper]

    train = []
    for im in train_src:
        train += crops(im, 13, 64, rng)
    write("train", train[:64])

    held_out = []
    for im, n in zip(eval_src, (7, 7, 6)):
        held_out += crops(im, n, 96, rng)
    write("eval", held_out)


if __name__ == "__main__":
    main()
