#!/usr/bin/env python3
"""Regenerates the toy task and dataset files under data/.

Output is deterministic; rerun after editing the tables below.
"""
import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

CORNERS = ["top left", "top right", "bottom left", "bottom right"]
OPPOSITE = {"top left": "bottom right", "top right": "bottom left",
            "bottom left": "top right", "bottom right": "top left"}

# type, synonym, same-group unrelated type, category, part
ANOMALIES = [
    ("scratch", "scrape", "stain", "abrasion", "metal plate"),
    ("hole", "puncture", "dent", "perforation", "plastic cover"),
    ("broken", "breakage", "bent", "fracture", "connector pin"),
    ("crack", "fissure", "hole", "fracture", "ceramic tile"),
    ("stain", "smudge", "discoloration", "contamination", "fabric sheet"),
    ("dirt", "debris", "wear", "contamination", "glass lens"),
    ("dent", "ding", "crack", "deformation", "aluminum can"),
    ("missing part", "missing component", "misplaced", "missing", "circuit board"),
]

NORMAL_PARTS = ["metal nut", "wooden board", "leather patch", "rubber seal",
                "transistor", "capsule", "bottle cap", "carpet swatch"]

PROMPT = "Inspect the product in this image. Is anything defective? Reply yes or no."


def normal_out(think, answer="No"):
    return f"<think>{think}</think><answer>{answer}</answer>"


def abnormal_out(think, loc, typ, answer="Yes"):
    return (f"<think>{think}</think><location>{loc}</location>"
            f"<type>{typ}</type><answer>{answer}</answer>")


def anomaly_think(part, typ, loc):
    return f"The {part} shows an irregular {typ} mark near the {loc} region."


def normal_think(part):
    return f"The {part} surface is uniform with no visible flaw."


def rotate(items, k):
    k %= len(items)
    return items[k:] + items[:k]


def synthetic_task():
    records = []
    for i in range(16):
        if i % 2 == 0:
            typ, syn, grp, cat, part = ANOMALIES[i // 2]
            loc = CORNERS[(i // 2) % 4]
            think = anomaly_think(part, typ, loc)
            cands = [
                abnormal_out(think, loc, typ),
                abnormal_out(f"The {part} looks damaged.", OPPOSITE[loc], syn),
                normal_out(f"The {part} looks fine."),
                abnormal_out(f"Something is off on the {part}.", loc, grp),
            ]
            rec = {"state": i, "label": "anomalous", "location": loc, "type": typ,
                   "category": cat}
        else:
            part = NORMAL_PARTS[i // 2]
            think = normal_think(part)
            cands = [
                normal_out(think),
                abnormal_out(f"The {part} might be worn.", "center", "wear"),
                normal_out(f"The {part} is hard to judge.", "Yes"),
                "Answer: " + normal_out(f"The {part} seems fine."),
            ]
            rec = {"state": i, "label": "normal"}
        rec["think"] = think
        rec["candidates"] = rotate(cands, i // 2)
        records.append(rec)
    return records


def ablation_task():
    records = []
    for i, (typ, syn, grp, cat, part) in enumerate(ANOMALIES):
        loc = CORNERS[i % 4]
        think = anomaly_think(part, typ, loc)
        cands = [
            abnormal_out(think, loc, typ),
            abnormal_out(think, OPPOSITE[loc], typ),
            abnormal_out(think, loc, grp),
            abnormal_out(think, OPPOSITE[loc], syn),
        ]
        records.append({"state": i, "label": "anomalous", "location": loc, "type": typ,
                        "category": cat, "think": think, "candidates": rotate(cands, i)})
    return records


def pa_sft_dataset(n=50, seed=7):
    rng = random.Random(seed)
    locations = CORNERS + ["center", "upper middle", "lower right corner", "left side"]
    samples = []
    for i in range(n):
        if i % 2 == 1:
            typ, syn, grp, cat, part = ANOMALIES[rng.randrange(len(ANOMALIES))]
            loc = locations[rng.randrange(len(locations))]
            target = abnormal_out(anomaly_think(part, typ, loc), loc, typ)
            gt = {"label": "anomalous", "location": loc, "type": typ, "category": cat}
        else:
            part = NORMAL_PARTS[rng.randrange(len(NORMAL_PARTS))]
            target = normal_out(normal_think(part))
            gt = {"label": "normal"}
        sample = {"id": f"s{i:03d}", "image_ref": f"images/{i:03d}.png",
                  "prompt": PROMPT, "target_output": target}
        sample.update(gt)
        sample["stage"] = "pa_sft" if i < 30 else "sc_grpo"
        samples.append(sample)
    return samples


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def main():
    write_jsonl(DATA / "synthetic_task.jsonl", synthetic_task())
    write_jsonl(DATA / "ablation_task.jsonl", ablation_task())
    write_jsonl(DATA / "pa_sft_toy.jsonl", pa_sft_dataset())


if __name__ == "__main__":
    main()
