#!/usr/bin/env python3
"""Independent reference values for the unit tests.

Writes tests/data/oracles.json and tests/data/fixture.wav. Everything here
is computed with numpy/scipy or by direct enumeration, never by calling the
C++ library. Re-run only when the data files change; the outputs are frozen
in the repository.
"""

import json
import math
import struct
import wave
from pathlib import Path

import numpy as np
from scipy.linalg import solve_toeplitz
from scipy.signal import firwin

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
OUT = ROOT / "tests" / "data"
FS = 16000


def load_phones():
    feats, phones = None, []
    for line in (DATA / "phones.txt").read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if cols[0] == "features":
            feats = cols[1].split(",")
            continue
        fset = set() if cols[2] == "-" else set(cols[2].split(","))
        phones.append((cols[0], cols[1], fset))
    return feats, phones


def load_letters():
    cands = {}
    for line in (DATA / "letters.txt").read_text().splitlines():
        if line.startswith("letter\t"):
            _, letter, rest = line.split("\t")
            cands[letter] = rest.split()
    return cands


FEATURES, PHONES = load_phones()
PHONE_INDEX = {p[0]: i for i, p in enumerate(PHONES)}
PHONE_FEATS = {p[0]: p[2] for p in PHONES}


def jaccard(x, y):
    u = x | y
    return 1.0 if not u else 1.0 - len(x & y) / len(u)


def phone_encoding(sym):
    v = [0.0] * (len(PHONES) + len(FEATURES))
    v[PHONE_INDEX[sym]] = 1.0
    for k, f in enumerate(FEATURES):
        if f in PHONE_FEATS[sym]:
            v[len(PHONES) + k] = 1.0
    return v


# --- LPC -------------------------------------------------------------------


def poles_to_lpc(resonances, order=10):
    a = np.array([1.0])
    for f, bw in resonances:
        r = math.exp(-math.pi * bw / FS)
        th = 2 * math.pi * f / FS
        a = np.convolve(a, [1.0, -2 * r * math.cos(th), r * r])
    out = np.zeros(order + 1)
    out[: len(a)] = a
    return out


def lsf_from_lpc(a):
    p = len(a) - 1
    ext = np.concatenate([a, [0.0]])
    rev = ext[::-1]
    sums = ext + rev
    diffs = ext - rev
    angles = []
    for poly in (sums, diffs):
        for z in np.roots(poly):
            w = float(np.angle(z))
            if 1e-9 < w < math.pi - 1e-9:
                angles.append(w)
    angles.sort()
    assert len(angles) == p, angles
    return angles


def lpc_cases():
    cases = []
    for res in (
        [(500, 80), (1500, 100), (2500, 120), (3500, 150), (4500, 200)],
        [(300, 60), (2300, 90), (3000, 150), (5000, 300), (7000, 400)],
        [(700, 80), (1200, 100)],
        [(250, 50)],
    ):
        a = poles_to_lpc(res)
        cases.append({"resonances": res, "a": a[1:].tolist(), "lsf": lsf_from_lpc(a)})
    return cases


def levinson_case():
    n = np.arange(400)
    lcg, noise = 12345, []
    for _ in n:
        lcg = (1103515245 * lcg + 12345) % (1 << 31)
        noise.append(lcg / (1 << 31) - 0.5)
    x = 0.6 * np.sin(2 * np.pi * 440 * n / FS) + 0.3 * np.sin(2 * np.pi * 1330 * n / FS) + 0.1 * np.array(noise)
    r = np.array([np.dot(x[: len(x) - k], x[k:]) for k in range(11)])
    a = solve_toeplitz(r[:10], -r[1:11])
    err = r[0] + np.dot(a, r[1:11])
    return {"x": x.tolist(), "r": r.tolist(), "a": a.tolist(), "error": float(err)}


def lowpass_cases():
    return [
        {"cutoff": c, "taps": 65, "h": firwin(65, c, window="hamming", fs=FS).tolist()}
        for c in (1000.0, 2500.0, 6000.0)
    ]


# --- nets --------------------------------------------------------------------


def act(name, v):
    if name == "tanh":
        return np.tanh(v)
    if name == "logistic":
        return 1 / (1 + np.exp(-v))
    if name == "linear":
        return v
    e = np.exp(v - v.max())
    return e / e.sum()


def forward_cases():
    rng = np.random.default_rng(7)
    out = []
    for sizes, hidden, output in (([5, 4, 3], "tanh", "softmax"), ([3, 6, 5, 2], "logistic", "linear")):
        layers, x = [], rng.uniform(-1, 1, sizes[0])
        h = x.copy()
        for l in range(len(sizes) - 1):
            w = rng.uniform(-0.8, 0.8, (sizes[l], sizes[l + 1]))
            b = rng.uniform(-0.2, 0.2, sizes[l + 1])
            layers.append({"weights": w.reshape(-1).tolist(), "bias": b.tolist()})
            h = act(output if l == len(sizes) - 2 else hidden, h @ w + b)
        out.append({"sizes": sizes, "hidden": hidden, "output": output, "layers": layers, "input": x.tolist(), "expected": h.tolist()})
    return out


# --- alignment ---------------------------------------------------------------


def enumerate_alignments(a, b):
    """Every gapped pairing of a and b, by direct recursion."""
    if not a and not b:
        yield []
        return
    if a and b:
        for rest in enumerate_alignments(a[1:], b[1:]):
            yield [(a[0], b[0])] + rest
    if a:
        for rest in enumerate_alignments(a[1:], b):
            yield [(a[0], None)] + rest
    if b:
        for rest in enumerate_alignments(a, b[1:]):
            yield [(None, b[0])] + rest


def align_cases():
    table = {("a", "a"): 0, ("a", "b"): 0.7, ("a", "c"): 1.6, ("b", "a"): 0.4, ("b", "b"): 0, ("b", "c"): 1.1,
             ("c", "a"): 2.0, ("c", "b"): 0.3, ("c", "c"): 0}
    ins, dele = 0.9, 0.6
    cases = []
    for a, b in (("abc", "cba"), ("aabb", "bc"), ("", "abc"), ("cab", "abca"), ("abcabc", "cc"), ("bbb", "aaaaaa")):
        best = math.inf
        for al in enumerate_alignments(a, b):
            c = sum(table[(x, y)] if x and y else (dele if x else ins) for x, y in al)
            best = min(best, c)
        cases.append({"a": list(a), "b": list(b), "cost": best})
    return {"table": [[x, y, c] for (x, y), c in table.items()], "insertion": ins, "deletion": dele, "cases": cases}


def jaccard_values():
    cands = load_letters()

    def letter(c):
        s = set()
        for p in cands[c]:
            s |= PHONE_FEATS[p]
        return s

    return {
        "c_k": jaccard(letter("c"), PHONE_FEATS["k"]),
        "c_m": jaccard(letter("c"), PHONE_FEATS["m"]),
        "t_dx": jaccard(PHONE_FEATS["t"], PHONE_FEATS["dx"]),
        "t_m": jaccard(PHONE_FEATS["t"], PHONE_FEATS["m"]),
        "x_union": sorted(set().union(*(PHONE_FEATS[p] for p in cands["x"]))),
        "c_union": sorted(PHONE_FEATS["s"] | PHONE_FEATS["k"]),
    }


# --- encodings -----------------------------------------------------------------

# Hand-built reps: list of words (phones, syllables as [start, end, nucleus, stress, accent], content, boundary flags).
REP_TWO_WORDS = [
    {"phones": ["dh", "ax"], "syllables": [[0, 2, 1, 0, False]], "content": False, "boundary": 1},
    {"phones": ["k", "ae", "t"], "syllables": [[0, 3, 1, 1, True]], "content": True, "boundary": 15},
]


def duration_vectors(words):
    flat = []  # (word, syllable, phone index in syllable)
    syl_list = []
    for wi, w in enumerate(words):
        for si, (s, e, nuc, stress, acc) in enumerate(w["syllables"]):
            syl_list.append((wi, si, acc))
            for k in range(s, e):
                flat.append((wi, si, k - s, w["phones"][k]))
    n = len(flat)

    def dist(i, level, forward):
        step = 1 if forward else -1
        d, j = 0, i
        while True:
            nj = j + step
            if nj < 0 or nj >= n:
                return d
            wj, wn = flat[j][0], flat[nj][0]
            if wj != wn:
                edge = min(wj, wn)
                if words[edge]["boundary"] & (1 << level):
                    return d
            d += 1
            j = nj

    slots = []
    for i, (wi, si, pi, sym) in enumerate(flat):
        stress = words[wi]["syllables"][si][3]
        v = phone_encoding(sym)
        v.append(1.0 if stress == 1 else 0.5 if stress == 2 else 0.0)
        v.append(1.0 if words[wi]["content"] else 0.0)
        v += [1.0 if dist(i, l, False) == 0 else 0.0 for l in range(4)]
        v += [1.0 if dist(i, l, True) == 0 else 0.0 for l in range(4)]
        slots.append(v)

    ns = len(syl_list)

    def syl_span(k, flag, forward):
        # syllables from k to the boundary (phrase flag=2, clause flag=4)
        cnt, j = 0, k
        while True:
            nj = j + (1 if forward else -1)
            if nj < 0 or nj >= ns:
                return cnt
            wj, wn = syl_list[j][0], syl_list[nj][0]
            if wj != wn and words[min(wj, wn)]["boundary"] & flag:
                return cnt
            cnt += 1
            j = nj

    def acc_dist(k, forward):
        j, d = k, 0
        while 0 <= j < ns:
            if syl_list[j][2]:
                return d
            j += 1 if forward else -1
            d += 1
        return 10

    clip = lambda x: min(x, 10) / 10.0
    out = []
    slot_size = len(slots[0])
    for i, (wi, si, pi, sym) in enumerate(flat):
        v = []
        for j in range(i - 2, i + 3):
            v += slots[j] if 0 <= j < n else [0.0] * slot_size
        s, e, nuc, stress, acc = words[wi]["syllables"][si]
        v.append(max(-4, min(4, pi - (nuc - s))) / 4.0)
        k = next(idx for idx, x in enumerate(syl_list) if x[0] == wi and x[1] == si)
        for flag in (2, 4):
            v += [clip(syl_span(k, flag, False)), clip(syl_span(k, flag, True))]
        v += [clip(acc_dist(k, False)), clip(acc_dist(k, True))]
        w = words[wi]
        last = si + 1 == len(w["syllables"])
        v += [float(last and bool(w["boundary"] & 2)), float(last and bool(w["boundary"] & 4)), float(stress == 0),
              float(not w["content"]), float(pi == nuc - s), float(bool(w["boundary"] & 12)),
              float(len(w["syllables"]) > 1), float(acc)]
        out.append(v)
    return out


def acoustic_vector():
    # One word, one phone /ow/ (stress 1), 35 ms; frame 1 with one feedback frame.
    v = phone_encoding("ow")
    v += [0.0] * (4 * len(v))
    v.append(15.0 / 35.0)
    v.append(math.log(0.35))
    v.append(1.0)
    v += [0.0] * 8
    prev = [0.1 * (k + 1) for k in range(14)]
    v += prev + [0.0] * 14 * 3
    return {"duration": 35.0, "frame": 1, "frames": 4, "previous": prev, "expected": v}


# --- wav -----------------------------------------------------------------------


def write_wav_fixture(samples):
    path = OUT / "fixture.wav"
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(FS)
        w.writeframes(struct.pack("<%dh" % len(samples), *samples))
    return path


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    wav_samples = [0, 1, -1, 32767, -32768, 1000, -1000, 12345]
    write_wav_fixture(wav_samples)
    oracles = {
        "lpc": lpc_cases(),
        "levinson": levinson_case(),
        "lowpass": lowpass_cases(),
        "forward": forward_cases(),
        "align": align_cases(),
        "jaccard": jaccard_values(),
        "duration_encoding": {"words": REP_TWO_WORDS, "vectors": duration_vectors(REP_TWO_WORDS)},
        "acoustic_encoding": acoustic_vector(),
        "phone_stats": {"durations": [80.0, 120.0], "mean": 100.0, "std": float(np.std([80.0, 120.0], ddof=1))},
        "wav": {"samples": wav_samples, "rate": FS},
    }
    (OUT / "oracles.json").write_text(json.dumps(oracles, indent=1) + "\n")
    print("wrote", OUT / "oracles.json")


if __name__ == "__main__":
    main()
