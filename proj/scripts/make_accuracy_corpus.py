#!/usr/bin/env python3
"""Writes the 50-pair candidate/golden scoring corpus under data/accuracy_corpus.

Golden documents cycle through road types, weather and actor layouts.
Candidates copy their golden document except for a fixed list of seeded
disagreements: six actor fields and two oracle fields.
"""
import pathlib
import shutil

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data" / "accuracy_corpus"

WEATHER = ["sunny", "cloudy", "overcast", "rainy", "snowy", "foggy", "windy", "not_mentioned"]
TIME = ["daytime", "nighttime", "not_mentioned"]
MARKERS = ["solid_line", "broken_line", "not_mentioned"]

# (road_type, ways, rule, violation_type, npc heading, ego behavior, signs)
LAYOUTS = [
    ("straight", 2, 21461, "improper_lane_crossing", "opposite_direction", "go_forward", []),
    ("straight", 2, 21460, "crossing_solid_line", "opposite_direction", "go_forward", []),
    ("intersection", 4, 21453, "red_light_violation", "from_left", "go_forward", ["traffic_light"]),
    ("intersection", 4, 21802, "failure_to_yield_at_stop", "from_right", "turn_left", ["stop_sign"]),
    ("t_intersection", 3, 21803, "failure_to_yield", "from_left", "turn_right", []),
    ("curve", 2, 21460, "crossing_solid_line", "opposite_direction", "go_forward", []),
    ("straight", 2, 22350, "unsafe_speed", "same_direction", "go_forward", ["speed_limit_sign"]),
    ("intersection", 4, 21801, "left_turn_failure_to_yield", "opposite_direction", "go_forward", []),
]

SOLO_RULES = [
    (22350, "unsafe_speed"),
    (21460, "crossing_solid_line"),
    (22349, "exceeding_maximum_speed"),
    (22107, "unsafe_lane_change"),
]


def golden(i):
    road, ways, rule, vtype, heading, ego_behavior, signs = LAYOUTS[i % len(LAYOUTS)]
    has_npc = i % 5 in (0, 2)  # 20 of 50 cases involve a second vehicle
    doc = {
        "weather": WEATHER[i % len(WEATHER)],
        "time": TIME[i % len(TIME)],
        "road": road,
        "ways": ways,
        "lanes": 2 if (road == "straight" and i % 7 == 0) else 1,
        "markers": MARKERS[i % len(MARKERS)],
        "signs": list(signs),
        "limit": 11.18 if "speed_limit_sign" in signs else None,
        "ego_type": "truck" if i % 11 == 0 else "car",
        "ego_behavior": ego_behavior if has_npc else "go_forward",
        "npc": None,
    }
    if has_npc:
        doc["npc"] = {
            "type": "truck" if i % 3 == 0 else "car",
            "behavior": "go_forward",
            "spatial": {"from_left": "left", "from_right": "right", "same_direction": "front"}.get(heading, "front"),
            "heading": heading,
        }
        doc["oracle"] = (rule, vtype, "npc1")
    else:
        solo_rule, solo_type = SOLO_RULES[i % len(SOLO_RULES)]
        if solo_rule == 22107 and doc["lanes"] == 1:
            doc["lanes"] = 2
        if solo_rule in (22350,) and not doc["signs"]:
            doc["signs"] = ["speed_limit_sign"]
            doc["limit"] = 13.41
        doc["oracle"] = (solo_rule, solo_type, "ego")
    return doc


def render(case_id, d):
    lines = [
        f"scenario_id: {case_id}",
        "environment:",
        f"  weather: {d['weather']}",
        f"  time_of_day: {d['time']}",
        "road_network:",
        f"  road_type: {d['road']}",
        f"  number_of_ways: {d['ways']}",
        f"  number_of_lanes: {d['lanes']}",
        f"  road_markers: {d['markers']}",
        "  traffic_signs:",
    ]
    lines += [f"    - {s}" for s in (d["signs"] or ["not_mentioned"])]
    if d["limit"] is not None:
        lines.append(f"  speed_limit_value: {d['limit']}")
    lines += [
        "actors:",
        "  ego:",
        f"    actor_type: {d['ego_type']}",
        f"    behavior: {d['ego_behavior']}",
    ]
    if d["npc"]:
        n = d["npc"]
        lines += [
            "  npcs:",
            "    - actor_id: npc1",
            f"      actor_type: {n['type']}",
            f"      behavior: {n['behavior']}",
            "      position:",
            "        reference: ego",
            f"        spatial_relation: {n['spatial']}",
            f"        heading_relation: {n['heading']}",
        ]
    rule, vtype, actor = d["oracle"]
    lines += [
        "oracle:",
        f"  - CVC_{rule}: {vtype}",
        '    description: "Seeded scoring case."',
        f"    violating_actor: {actor}",
    ]
    return "\n".join(lines) + "\n"


FLIP = {"from_left": "from_right", "from_right": "from_left", "opposite_direction": "same_direction",
        "same_direction": "opposite_direction"}


def seed_disagreements(cases):
    npc_cases = [i for i, d in enumerate(cases) if d["npc"]]
    # Actor: three heading mix-ups, one spatial mix-up, two ego behaviors.
    for i in npc_cases[1:4]:
        cases[i]["npc"]["heading"] = FLIP[cases[i]["npc"]["heading"]]
    cases[npc_cases[5]]["npc"]["spatial"] = "behind"
    for i in (npc_cases[7], npc_cases[9]):
        cases[i]["ego_behavior"] = "turn_right" if cases[i]["ego_behavior"] != "turn_right" else "go_forward"
    # Oracle: one wrong section, one wrong violation type.
    rule, vtype, actor = cases[4]["oracle"]
    cases[4]["oracle"] = (21461 if rule != 21461 else 21460, vtype, actor)
    rule, vtype, actor = cases[13]["oracle"]
    cases[13]["oracle"] = (rule, "improper_lane_usage", actor)


def main():
    import copy
    goldens = [golden(i) for i in range(50)]
    candidates = copy.deepcopy(goldens)
    seed_disagreements(candidates)
    if ROOT.exists():
        shutil.rmtree(ROOT)
    for i, (g, c) in enumerate(zip(goldens, candidates)):
        case_id = f"case_{i + 1:02d}"
        d = ROOT / case_id
        d.mkdir(parents=True)
        (d / "golden.yaml").write_text(render(case_id, g))
        (d / "candidate.yaml").write_text(render(case_id, c))


if __name__ == "__main__":
    main()
