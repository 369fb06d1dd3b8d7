#!/usr/bin/env python3
"""Regenerates the bundled feeder fixtures in feeders/.

Line constants are the phase impedance matrices (ohm/mile) of the public IEEE
distribution test feeder configurations. Loads on ieee13_like are the IEEE 13-bus spot loads
scaled to 40%; its regulator is replaced by a fixed 1.03 pu source setpoint.
"""

import json
import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parents[2] / "feeders"
PH = "ABC"
PV13 = 2.0  # PV kVA per kVA of local demand on ieee13_like
V13 = 1.03


def sym(d):
    """Builds a full 3x3 [r, x] matrix from the upper triangle {'AA': (r, x), 'AB': ...}."""
    m = {}
    for k, v in d.items():
        m[(k[0], k[1])] = v
        m[(k[1], k[0])] = v
    return m


# IEEE 13-bus configurations 601-607 and the IEEE 4-bus 336 ACSR line
CFG = {
    "601": sym({"AA": (0.3465, 1.0179), "AB": (0.1560, 0.5017), "AC": (0.1580, 0.4236),
                "BB": (0.3375, 1.0478), "BC": (0.1535, 0.3849), "CC": (0.3414, 1.0348)}),
    "602": sym({"AA": (0.7526, 1.1814), "AB": (0.1580, 0.4236), "AC": (0.1560, 0.5017),
                "BB": (0.7475, 1.1983), "BC": (0.1535, 0.3849), "CC": (0.7436, 1.2112)}),
    "603": sym({"BB": (1.3294, 1.3471), "BC": (0.2066, 0.4591), "CC": (1.3238, 1.3569)}),
    "604": sym({"AA": (1.3238, 1.3569), "AC": (0.2066, 0.4591), "CC": (1.3294, 1.3471)}),
    "605": sym({"CC": (1.3292, 1.3475)}),
    "606": sym({"AA": (0.7982, 0.4463), "AB": (0.3192, 0.0328), "AC": (0.2849, -0.0143),
                "BB": (0.7891, 0.4041), "BC": (0.3192, 0.0328), "CC": (0.7982, 0.4463)}),
    "607": sym({"AA": (1.3425, 0.5124)}),
    "336": sym({"AA": (0.4576, 1.0780), "AB": (0.1560, 0.5017), "AC": (0.1535, 0.3849),
                "BB": (0.4666, 1.0482), "BC": (0.1580, 0.4236), "CC": (0.4615, 1.0651)}),
}
# single-phase taps: #4 ACSR with earth return, usable on any phase
for p in PH:
    CFG["1ph_" + p] = {(p, p): (2.6450, 1.7130)}


def transposed(cfg):
    """Same conductors with ideal transposition: mean self and mean mutual terms."""
    z = CFG[cfg]
    phases = sorted({k[0] for k in z})
    mean = lambda vals: tuple(round(sum(v[i] for v in vals) / len(vals), 4) for i in (0, 1))
    self_z = mean([z[(p, p)] for p in phases])
    mutual = mean([z[(p, q)] for p in phases for q in phases if p < q])
    return {(p, q): self_z if p == q else mutual for p in phases for q in phases}


CFG["336T"] = transposed("336")
CFG["602T"] = transposed("602")


def impedance(cfg, phases):
    z = CFG[cfg]
    return [[list(z[(r, c)]) if (r in phases and c in phases) else None for c in PH] for r in PH]


def seg(frm, to, phases, cfg, miles):
    return {"from": frm, "to": to, "phases": phases, "impedance": impedance(cfg, phases), "length": miles}


def bus(bid, phases, load=None):
    b = {"id": bid, "phases": phases}
    if load:
        b["load"] = {p: [round(kw, 4), round(kvar, 4)] for p, (kw, kvar) in load.items()}
    return b


def pv(pid, at, phases, kva):
    # inverters sized 15% above panel output, as in 172.5/150, 69/60, 23/20, 11.5/10
    return {"id": pid, "bus": at, "phases": phases, "rating_kva": kva, "p_max_kw": round(kva / 1.15, 6)}


def twobus():
    # 12.47 kV single-phase lateral; 3000 kVA base gives z = 0.05 + j0.10 pu
    zb = 12.47 ** 2 / 3.0
    return {
        "name": "twobus",
        "root": "sub",
        "bases": {"kva": 3000.0, "kv_ll": 12.47},
        "buses": [bus("sub", "A"), bus("n1", "A", {"A": (200.0, 60.0)})],
        "segments": [{"from": "sub", "to": "n1", "phases": "A",
                      "impedance": [[[round(0.05 * zb, 6), round(0.10 * zb, 6)], None, None],
                                    [None, None, None], [None, None, None]]}],
        "pv_units": [pv("pv1", "n1", "A", 345.0)],
    }


def chain5():
    buses = [bus("sub", "ABC")]
    segs = []
    pvs = []
    prev = "sub"
    for k in range(1, 5):
        b = "n%d" % k
        buses.append(bus(b, "ABC", {p: (200.0, 70.0) for p in PH}))
        segs.append(seg(prev, b, "ABC", "336", 1.5))
        pvs.append(pv("pv%d" % k, b, "ABC", 172.5))
        prev = b
    return {"name": "chain5", "root": "sub", "bases": {"kva": 3000.0, "kv_ll": 12.47},
            "buses": buses, "segments": segs, "pv_units": pvs}


def ieee13_like():
    s = 0.4
    ld = lambda d: {p: (kw * s, kvar * s) for p, (kw, kvar) in d.items()}
    buses = [
        bus("650", "ABC"),
        bus("632", "ABC", ld({"A": (17 / 2, 10 / 2), "B": (66 / 2, 38 / 2), "C": (117 / 2, 68 / 2)})),
        bus("633", "ABC", ld({"A": (160, 110), "B": (120, 90), "C": (120, 90)})),
        bus("645", "BC", ld({"B": (170, 125)})),
        bus("646", "BC", ld({"B": (230, 132)})),
        bus("671", "ABC", ld({"A": (385 + 17 / 2, 220 + 10 / 2), "B": (385 + 66 / 2, 220 + 38 / 2),
                              "C": (385 + 117 / 2, 220 + 68 / 2)})),
        bus("680", "ABC"),
        bus("684", "AC"),
        bus("611", "C", ld({"C": (170, 80)})),
        bus("652", "A", ld({"A": (128, 86)})),
        bus("692", "ABC", ld({"C": (170, 151)})),
        bus("675", "ABC", ld({"A": (485, 190), "B": (68, 60), "C": (290, 212)})),
    ]
    ft = 1.0 / 5280.0
    segs = [
        seg("650", "632", "ABC", "601", 2000 * ft),
        seg("632", "633", "ABC", "602", 500 * ft),
        seg("632", "645", "BC", "603", 500 * ft),
        seg("645", "646", "BC", "603", 300 * ft),
        seg("632", "671", "ABC", "601", 2000 * ft),
        seg("671", "680", "ABC", "601", 1000 * ft),
        seg("671", "684", "AC", "604", 300 * ft),
        seg("684", "611", "C", "605", 300 * ft),
        seg("684", "652", "A", "607", 800 * ft),
        seg("671", "692", "ABC", "601", 10 * ft),  # switch, modeled as a short line
        seg("692", "675", "ABC", "606", 500 * ft),
    ]
    # rooftop PV behind every loaded bus, sized from the local demand
    pvs = []
    for b in buses:
        if "load" in b:
            s_kva = sum(math.hypot(kw, kvar) for kw, kvar in b["load"].values())
            pvs.append(pv("pv" + b["id"], b["id"], b["phases"], max(10.0, round(PV13 * s_kva * 1.15 / 10.0) * 10.0)))
    # the source setpoint stands in for the substation regulator, which is not modeled
    return {"name": "ieee13_like", "root": "650", "v_source_pu": V13, "bases": {"kva": 5000.0, "kv_ll": 4.16},
            "buses": buses, "segments": segs, "pv_units": pvs}


def tree25_pv():
    buses = [bus("sub", "ABC")]
    segs = []
    three = lambda kw, kvar: {p: (kw, kvar) for p in PH}

    # sequence-style (transposed) line constants on the three-phase sections
    trunk = ["t%d" % k for k in range(1, 9)]
    prev = "sub"
    for k, t in enumerate(trunk):
        buses.append(bus(t, "ABC", three(60.0 + 5 * (k % 3), 20.0)))
        segs.append(seg(prev, t, "ABC", "336T", 0.5))
        prev = t

    def lateral(parent, names, phases, cfg, miles, kw, kvar):
        up = parent
        for n in names:
            buses.append(bus(n, phases, {p: (kw, kvar) for p in phases}))
            segs.append(seg(up, n, phases, cfg, miles))
            up = n

    lateral("t2", ["l1", "l2"], "ABC", "602T", 0.6, 40.0, 15.0)
    lateral("t4", ["a1", "a2", "a3"], "A", "1ph_A", 0.4, 25.0, 8.0)
    lateral("t5", ["b1", "b2"], "B", "1ph_B", 0.4, 25.0, 8.0)
    lateral("t6", ["c1", "c2", "c3"], "C", "1ph_C", 0.4, 25.0, 8.0)
    lateral("t7", ["m1", "m2", "m3"], "ABC", "602T", 0.5, 35.0, 12.0)
    lateral("t8", ["e1", "e2", "e3"], "ABC", "602T", 0.5, 30.0, 10.0)

    # rooftop PV behind most service points: larger units on the three-phase
    # trunk and laterals, small ones on the single-phase taps
    size = {"t": 172.5, "l": 69.0, "m": 69.0, "e": 69.0, "a": 23.0, "b": 23.0, "c": 23.0}
    pvs = [pv("pv_" + b["id"], b["id"], b["phases"], size[b["id"][0]]) for b in buses[1:]]
    assert len(buses) == 25, len(buses)
    return {"name": "tree25_pv", "root": "sub", "bases": {"kva": 3000.0, "kv_ll": 12.47},
            "buses": buses, "segments": segs, "pv_units": pvs}


def main():
    OUT.mkdir(exist_ok=True)
    for make in (twobus, chain5, ieee13_like, tree25_pv):
        doc = make()
        (OUT / (doc["name"] + ".json")).write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
