#!/usr/bin/env python3
"""Build a two-class (0/1) MNIST subset in IDX format.

Source: the `mnist` npm package (MIT, J. Cazala), which bundles real MNIST
samples as JSON arrays of 784 intensities per image. Obtain it with
`npm pack mnist && tar xzf mnist-*.tgz` and pass `package/src/digits`.

Per class, the first 60% of samples go to the train split and the rest to
the test split; each split is then shuffled with a fixed seed.
"""
import json
import random
import struct
import sys
from pathlib import Path


def write_idx(out: Path, prefix: str, samples):
    with open(out / f"{prefix}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(samples), 28, 28))
        for pixels, _ in samples:
            f.write(bytes(pixels))
    with open(out / f"{prefix}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(samples)))
        f.write(bytes(label for _, label in samples))


def main():
    digits, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    train, test = [], []
    for label in (0, 1):
        raw = json.loads((digits / f"{label}.json").read_text())["data"]
        n = len(raw) // 784
        imgs = [[min(255, round(v * 255)) for v in raw[i * 784:(i + 1) * 784]]
                for i in range(n)]
        cut = int(0.6 * n)
        train += [(img, label) for img in imgs[:cut]]
        test += [(img, label) for img in imgs[cut:]]
    rng = random.Random(20200101)
    rng.shuffle(train)
    rng.shuffle(test)
    write_idx(out, "train", train)
    write_idx(out, "t10k", test)
    print(f"train={len(train)} test={len(test)}")


if __name__ == "__main__":
    main()
