#!/usr/bin/env python3
"""Trains the small ResNet-8-style classifier shipped in models/ and writes the
matching synthetic test batch.

The images are procedurally drawn 32x32 RGB shapes in ten classes, stored in
the CIFAR-10 binary record layout (1 label byte + R, G, B planes), so every
tool that reads CIFAR-10 batches also reads these. The network mirrors
make_resnet8_style(): 3x3 stem, three single-block stages (the last two
downsample by 2 with a strided 1x1 max-pool shortcut), global average pool,
dense classifier, softmax.

    python3 tools/train_small_net.py --out-dir .

Outputs:
    data/synthetic_test_batch.bin      1000 records
    models/small_resnet8.json / .bin   graph + float32 weights
    models/small_resnet8_top1.txt      torch top-1 predictions on the test batch
"""
import argparse
import json
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

CLASSES = 10
SIZE = 32


def shape_mask(cls, rng):
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float32)
    cy, cx = 16 + rng.integers(-5, 6, size=2)
    r = rng.integers(6, 12)
    dy, dx = yy - cy, xx - cx
    dist = np.sqrt(dy * dy + dx * dx)
    box = (np.abs(dy) <= r) & (np.abs(dx) <= r)
    phase = rng.integers(0, 4)
    if cls == 0:
        m = dist <= r
    elif cls == 1:
        m = box
    elif cls == 2:
        m = (dist <= r) & (dist >= r - 3)
    elif cls == 3:
        m = box & (((yy + phase) // 2) % 2 == 0)
    elif cls == 4:
        m = box & (((xx + phase) // 2) % 2 == 0)
    elif cls == 5:
        m = box & ((np.abs(dy) <= 2) | (np.abs(dx) <= 2))
    elif cls == 6:
        m = box & ((np.abs(dy - dx) <= 2) | (np.abs(dy + dx) <= 2))
    elif cls == 7:
        m = box & (dy >= -r) & (np.abs(dx) <= (dy + r) / 2)
    elif cls == 8:
        m = box & ((((yy + phase) // 4) + ((xx + phase) // 4)) % 2 == 0)
    else:
        m = (np.sqrt((dy - r / 2) ** 2 + dx**2) <= 3) | (np.sqrt((dy + r / 2) ** 2 + dx**2) <= 3)
    return m.astype(np.float32)


def make_split(n, seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, CLASSES, size=n)
    images = np.empty((n, 3, SIZE, SIZE), dtype=np.uint8)
    for i, cls in enumerate(labels):
        bg = rng.uniform(0.0, 0.6, size=(3, 1, 1))
        fg = np.clip(bg + rng.choice([-1.0, 1.0]) * rng.uniform(0.25, 0.5, size=(3, 1, 1)), 0.0, 1.0)
        m = shape_mask(cls, rng)[None]
        img = bg + m * (fg - bg) + rng.normal(0.0, 0.11, size=(3, SIZE, SIZE))
        images[i] = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    return images, labels


def cifar_bytes(images, labels):
    out = bytearray()
    for img, label in zip(images, labels):
        out.append(int(label))
        out.extend(img.tobytes())
    return bytes(out)


class Block(nn.Module):
    def __init__(self, width, stride):
        super().__init__()
        self.stride = stride
        self.a = nn.Conv2d(width, width, 3, stride=stride, padding=1)
        self.b = nn.Conv2d(width, width, 3, padding=1)

    def forward(self, x):
        y = self.b(F.relu(self.a(x)))
        shortcut = x if self.stride == 1 else x[:, :, ::2, ::2]
        return F.relu(y + shortcut)


class SmallResNet8(nn.Module):
    def __init__(self, width):
        super().__init__()
        self.stem = nn.Conv2d(3, width, 3, padding=1)
        self.stages = nn.ModuleList([Block(width, 1), Block(width, 2), Block(width, 2)])
        self.fc = nn.Linear(width, CLASSES)

    def forward(self, x):
        x = F.relu(self.stem(x))
        for s in self.stages:
            x = s(x)
        return self.fc(x.mean(dim=(2, 3)))


def export(model, width, json_path):
    blob = bytearray()

    def put(t):
        values = t.detach().cpu().numpy().astype("<f4").ravel()
        offset = len(blob)
        blob.extend(values.tobytes())
        return {"offset": offset, "count": int(values.size)}

    def conv(node_id, src, layer, stride):
        w = layer.weight.permute(2, 3, 1, 0).contiguous()  # OIHW -> HWCN
        ref = put(w)
        ref["shape"] = list(w.shape)
        padding = "same" if stride == 1 else [1, 1, 1, 1]
        return {
            "id": node_id,
            "kind": "Conv2D",
            "inputs": [src],
            "strides": [stride, stride],
            "dilations": [1, 1],
            "padding": padding,
            "filters": ref,
            "bias": put(layer.bias),
        }

    nodes = [{"id": "input", "kind": "Input", "inputs": [], "shape": [SIZE, SIZE, 3]}]
    nodes.append(conv("conv0", "input", model.stem, 1))
    nodes.append({"id": "relu0", "kind": "ReLU", "inputs": ["conv0"]})
    x = "relu0"
    for i, stage in enumerate(model.stages, start=1):
        nodes.append(conv(f"conv{i}a", x, stage.a, stage.stride))
        nodes.append({"id": f"relu{i}a", "kind": "ReLU", "inputs": [f"conv{i}a"]})
        nodes.append(conv(f"conv{i}b", f"relu{i}a", stage.b, 1))
        shortcut = x
        if stage.stride != 1:
            shortcut = f"skip{i}"
            nodes.append({"id": shortcut, "kind": "MaxPool", "inputs": [x], "window": [1, 1], "strides": [2, 2]})
        nodes.append({"id": f"add{i}", "kind": "Add", "inputs": [f"conv{i}b", shortcut]})
        nodes.append({"id": f"relu{i}b", "kind": "ReLU", "inputs": [f"add{i}"]})
        x = f"relu{i}b"
    nodes.append({"id": "gap", "kind": "AvgPool", "inputs": [x], "global": True})
    nodes.append({"id": "flatten", "kind": "Flatten", "inputs": ["gap"]})
    w = model.fc.weight.t().contiguous()  # (out, in) -> (in, out)
    dense = put(w)
    dense["shape"] = [width, CLASSES]
    nodes.append({"id": "logits", "kind": "Dense", "inputs": ["flatten"], "weights": dense, "bias": put(model.fc.bias)})
    nodes.append({"id": "probs", "kind": "Softmax", "inputs": ["logits"]})

    weights_path = json_path.with_suffix(".bin")
    doc = {"format": "axemu-model", "version": 1, "weights": weights_path.name, "output": "probs", "nodes": nodes}
    json_path.write_text(json.dumps(doc, indent=2) + "\n")
    weights_path.write_bytes(bytes(blob))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("."))
    ap.add_argument("--width", type=int, default=16)
    ap.add_argument("--train", type=int, default=8000)
    ap.add_argument("--test", type=int, default=1000)
    ap.add_argument("--epochs", type=int, default=12)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    torch.manual_seed(args.seed)
    train_x, train_y = make_split(args.train, args.seed)
    test_x, test_y = make_split(args.test, args.seed + 1)

    to_tensor = lambda a: torch.from_numpy(a.astype(np.float32) / 255.0)
    xtr, ytr = to_tensor(train_x), torch.from_numpy(train_y).long()
    xte, yte = to_tensor(test_x), torch.from_numpy(test_y).long()

    model = SmallResNet8(args.width)
    opt = torch.optim.Adam(model.parameters(), lr=3e-3)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=args.epochs)
    for epoch in range(args.epochs):
        model.train()
        perm = torch.randperm(len(xtr))
        total = 0.0
        for i in range(0, len(xtr), 64):
            idx = perm[i : i + 64]
            loss = F.cross_entropy(model(xtr[idx]), ytr[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
        sched.step()
        model.eval()
        with torch.no_grad():
            acc = (model(xte).argmax(1) == yte).float().mean().item()
        print(f"epoch {epoch + 1}: loss {total / len(xtr):.4f} test acc {acc:.4f}", flush=True)

    model.eval()
    with torch.no_grad():
        top1 = model(xte).argmax(1).numpy()

    (args.out_dir / "data").mkdir(parents=True, exist_ok=True)
    (args.out_dir / "models").mkdir(parents=True, exist_ok=True)
    (args.out_dir / "data" / "synthetic_test_batch.bin").write_bytes(cifar_bytes(test_x, test_y))
    export(model, args.width, args.out_dir / "models" / "small_resnet8.json")
    (args.out_dir / "models" / "small_resnet8_top1.txt").write_text("".join(f"{int(v)}\n" for v in top1))


if __name__ == "__main__":
    main()
