#!/usr/bin/env python3
"""Generate a synthetic country-style knowledge graph in the labeled TSV layout.

Core entities are fictional historical states linked by state-to-state
relations; attribute entities (languages, cities, events, organizations,
people, currencies, treaties) hang off the states through attribute relations.
Degrees are heavy-tailed (preferential attachment) so that ego-graphs vary in
size the way real country graphs do.

Generated base names never coincide with a word of any name in the pseudonym
pool, so pseudonymized prompts never mix the two vocabularies.

The default sizes equal the published statistics of the WikiDataSets
Countries graph (3,552 core and 27,226 attribute entities, 49 core and 162
attribute relations, 11,361 core and 51,952 attribute facts).

Usage:
  make_synthetic_kg.py --out data/synthetic_countries
  make_synthetic_kg.py --out data/synthetic_small --core 60 --attributes 180 \
      --core-relations 12 --attribute-relations 30 --core-facts 200 --attribute-facts 300 \
      --regions 5
"""
import argparse
import csv
import itertools
import os
import random
import re

STATE_ONSETS = ["Ab", "Ad", "Am", "Ask", "Bel", "Cap", "Cor", "Dal", "Fen", "Gal",
                "Hav", "Jor", "Kas", "Lom", "Lyr", "Mer", "Nor", "Ost", "Pal", "Qar",
                "Rav", "Sel", "Tam", "Ver", "Wen", "Yar", "Zan", "Hol", "Mag", "Sav"]
STATE_MIDDLES = ["", "", "in", "ov", "er", "am", "ul", "et", "on", "iv"]
STATE_MIDDLES2 = ["", "", "", "ad", "esh", "im", "or", "ub"]
STATE_ENDINGS = ["ovy", "ekh", "uth", "assa", "imbo", "orne", "ynn", "elle", "ard",
                 "ugo", "enza", "ashi", "olt", "irra", "anth", "ewa", "osk", "umbe",
                 "ingol", "avec", "orrow", "esque", "ilth", "undar", "oyne", "alko", "ethry",
                 "ivos", "embre", "ukai"]
STATE_FORMS = ["Kingdom of {}", "Republic of {}", "Duchy of {}", "Grand Duchy of {}",
               "Principality of {}", "Empire of {}", "Sultanate of {}", "Electorate of {}",
               "Margraviate of {}", "County of {}", "Free City of {}", "{}",
               "{}", "{}", "{} Confederation", "People's Republic of {}",
               "Socialist Republic of {}", "Emirate of {}", "Khanate of {}",
               "Commonwealth of {}"]

CORE_RELATIONS = [
    "shares border with", "diplomatic relation", "follows", "followed by", "replaces",
    "replaced by", "part of", "has part", "separated from", "merged into",
    "contains administrative territorial entity", "located in the administrative territorial entity",
    "territory claimed by", "country", "member of", "founded by", "successor state",
    "predecessor state", "allied with", "at war with", "vassal of", "overlord of",
    "in personal union with", "protectorate of", "colony of", "mandate of",
    "occupied by", "annexed by", "puppet state of", "twinned administrative body",
    "participant in the same war as", "signatory together with", "trading partner of",
    "enclave within", "exclave of", "shares maritime border with", "capital moved from",
    "dynastic union with", "condominium with", "tributary of", "guarantor of",
    "client state of", "customs union with", "federated with", "rival of",
    "split into", "recognized by", "sister state of", "historical region of",
]

ATTRIBUTE_KINDS = {
    # kind: (category, relation labels, label patterns)
    "language": ("Language",
                 ["official language", "language used", "recognized minority language",
                  "working language", "liturgical language", "language of work or name",
                  "writing system", "native language of population"],
                 ["{} language", "Old {}", "Middle {}", "{} dialect", "{} Creole"]),
    "city": ("City",
             ["capital", "largest city", "contains settlement", "seat of government",
              "former capital", "port city", "royal residence", "twin city",
              "administrative centre", "coronation city"],
             ["{}", "{}burg", "Port {}", "San {}", "{}grad", "{}ford", "New {}", "Fort {}"]),
    "event": ("Event",
              ["significant event", "participant in", "conflict", "location of", "ratified",
               "declared war in", "revolution", "uprising", "coronation", "famine",
               "plague outbreak", "independence declared in", "referendum",
               "earthquake", "flood", "royal wedding"],
              ["Battle of {}", "Siege of {}", "{} Revolution", "{} War", "Treaty of {}",
               "{} Uprising", "Congress of {}", "{} Crisis", "Partition of {}",
               "Great Fire of {}", "{} Rebellion", "Peace of {}"]),
    "organization": ("Organization",
                     ["member of organization", "founding member of", "observer in",
                      "headquarters of", "suspended member of", "signatory of charter",
                      "applicant to", "associate member of"],
                     ["{} League", "{} Union", "{} Council", "{} Alliance", "{} Pact",
                      "Order of {}", "{} Assembly", "{} Trading Company", "{} Federation of Guilds"]),
    "person": ("Person",
               ["head of state", "head of government", "monarch", "founded by person",
                "governor", "chancellor", "regent", "ambassador from", "military commander",
                "chief justice", "foreign minister", "national poet", "court painter"],
               ["{} the Elder", "{} the Great", "{} the Younger", "{} of {}",
                "Queen {}", "King {}", "Prince {}", "Duke {}", "Cardinal {}"]),
    "currency": ("Currency",
                 ["currency", "former currency", "coin minted", "reserve currency"],
                 ["{} mark", "{} thaler", "{} florin", "{} ducat", "{} crown", "{} shilling"]),
    "religion": ("Religion",
                 ["official religion", "state church", "religion or worldview", "patron saint"],
                 ["{} Church", "{} Orthodoxy", "Order of Saint {}", "{} Rite"]),
    "place": ("Place",
              ["continent", "located in or next to body of water", "highest point",
               "lowest point", "located on terrain feature", "mountain range", "river",
               "island", "lake", "peninsula", "climate zone", "time zone", "coast of",
               "desert", "forest", "valley", "strait", "bay"],
              ["{} Mountains", "{} River", "Lake {}", "{} Island", "{} Peninsula", "Gulf of {}",
               "{} Plateau", "{} Valley", "{} Strait", "Cape {}", "{} Forest", "{} Desert"]),
    "symbol": ("Symbol",
               ["anthem", "flag", "coat of arms", "motto", "national animal", "national flower",
                "national dish", "national sport", "national epic", "national colour"],
               ["Hymn of {}", "Flag of {}", "Arms of {}", "{} Eagle", "{} Rose", "{} Lion",
                "Song of {}", "{} Stew", "{} Tricolour"]),
    "institution": ("Institution",
                    ["legislative body", "highest judicial authority", "central bank",
                     "executive body", "diplomatic mission", "university", "archive",
                     "military branch", "police force", "postal service", "academy of sciences",
                     "state broadcaster", "national library", "mint", "stock exchange"],
                    ["{} Diet", "Senate of {}", "Bank of {}", "{} Royal Navy",
                     "University of {}", "{} Academy", "High Court of {}", "{} Archive",
                     "{} Guard", "{} Post"]),
}

PERSON_NAMES = ["Aldric", "Berenike", "Casimir", "Drahomira", "Eberhard", "Fiorella",
                "Gottfried", "Hedwig", "Ignatius", "Jadwiga", "Konstantin", "Ludmila",
                "Mstislav", "Nikephoros", "Ottokar", "Przemysl", "Radegund", "Sigismund",
                "Theodora", "Ulrich", "Vratislav", "Wenceslas", "Ximena", "Yaroslav",
                "Zbigniew", "Anselm", "Bohdan", "Clotilde", "Dagobert", "Euphemia"]

WORD = re.compile(r"[A-Za-z']+")


def pseudonym_words(path):
    words = set()
    if os.path.exists(path):
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                words.update(w.lower() for w in WORD.findall(row["label"]))
    return words


def base_names(rng, n, banned):
    space = len(STATE_ONSETS) * len(STATE_MIDDLES) * len(STATE_MIDDLES2) * len(STATE_ENDINGS)
    if n > space // 2:
        raise SystemExit(f"cannot draw {n} distinct base names from {space} combinations")
    out, seen = [], set()
    while len(out) < n:
        name = (rng.choice(STATE_ONSETS) + rng.choice(STATE_MIDDLES) + rng.choice(STATE_MIDDLES2) +
                rng.choice(STATE_ENDINGS))
        name = name.capitalize()
        if name.lower() in banned or name in seen:
            continue
        seen.add(name)
        out.append(name)
    return out


def attribute_relations(count):
    # Interleave kinds so that every kind keeps a relation when count is small.
    rels = []
    for i in range(max(len(v[1]) for v in ATTRIBUTE_KINDS.values())):
        for kind, (_, labels, _) in ATTRIBUTE_KINDS.items():
            if i < len(labels):
                rels.append((kind, labels[i]))
    if count < len(ATTRIBUTE_KINDS):
        raise SystemExit(f"need at least {len(ATTRIBUTE_KINDS)} attribute relations")
    extra = ["former", "disputed", "historical", "de facto", "nominal", "ceremonial",
             "provisional"]
    i = 0
    while len(rels) < count:
        kind, label = rels[i % len(rels)]
        prefix = extra[(i // len(rels)) % len(extra)]
        rels.append((kind, f"{prefix} {label}"))
        i += 1
    return rels[:count]


def cumulative(weights):
    return list(itertools.accumulate(weights))


def preferential(rng, cum, k):
    return rng.choices(range(len(cum)), cum_weights=cum, k=k)


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=20250418)
    ap.add_argument("--regions", type=int, default=40)
    ap.add_argument("--locality", type=float, default=0.8,
                    help="probability that a fact stays inside the subject's region")
    ap.add_argument("--global-attributes", type=float, default=0.02,
                    help="share of attributes not tied to a region")
    ap.add_argument("--major-states", type=int, default=0,
                    help="states joined by dense mutual diplomatic relations")
    ap.add_argument("--major-density", type=float, default=0.5)
    ap.add_argument("--major-weight", type=float, default=1.0,
                    help="activity multiplier for modern states")
    ap.add_argument("--state-tail", type=float, default=2.5,
                    help="Pareto shape of per-state activity (smaller = heavier hubs)")
    ap.add_argument("--attribute-tail", type=float, default=0.8,
                    help="Pareto shape of attribute popularity (smaller = more widely shared)")
    ap.add_argument("--core", type=int, default=3552)
    ap.add_argument("--attributes", type=int, default=27226)
    ap.add_argument("--core-relations", type=int, default=49)
    ap.add_argument("--attribute-relations", type=int, default=162)
    ap.add_argument("--core-facts", type=int, default=11361)
    ap.add_argument("--attribute-facts", type=int, default=51952)
    ap.add_argument("--pseudonyms", default=os.path.join(os.path.dirname(__file__), "..", "data",
                                                         "pseudonyms.csv"))
    args = ap.parse_args()
    rng = random.Random(args.seed)
    banned = pseudonym_words(args.pseudonyms)

    names = base_names(rng, args.core + args.attributes, banned)
    core_labels, used = [], set()
    for name in names[:args.core]:
        label = rng.choice(STATE_FORMS).format(name)
        core_labels.append(label)
        used.add(label)

    kinds = list(ATTRIBUTE_KINDS)
    kind_weights = [3, 3, 4, 2, 3, 1, 1, 3, 2, 2]
    attr = []  # (label, kind)
    attr_names = names[args.core:]
    for i in range(args.attributes):
        kind = rng.choices(kinds, weights=kind_weights)[0]
        pattern = rng.choice(ATTRIBUTE_KINDS[kind][2])
        if kind == "person":
            first = rng.choice(PERSON_NAMES)
            label = pattern.format(first, attr_names[i]) if pattern.count("{}") == 2 \
                else pattern.format(first) + " " + attr_names[i]
        else:
            label = pattern.format(attr_names[i])
        if label in used:
            label = f"{label} ({attr_names[(i + 1) % len(attr_names)]})"
        used.add(label)
        attr.append((label, kind))

    core_rel = CORE_RELATIONS[:args.core_relations]
    attr_rel = attribute_relations(args.attribute_relations)

    # Heavy-tailed activity per state; states and most attributes belong to a
    # region, and facts stay inside the region with probability --locality, so
    # neighbouring states share languages, organizations and places.
    weights = [rng.paretovariate(args.state_tail) for _ in range(args.core)]
    state_region = [rng.randrange(args.regions) for _ in range(args.core)]
    core_rel_weights = [1.0 / (1 + 0.15 * i) for i in range(len(core_rel))]
    core_edges = set()
    # Optional block of modern states joined by dense mutual diplomatic relations.
    major = rng.sample(range(args.core), min(args.major_states, args.core))
    for a in major:
        weights[a] *= args.major_weight
    activity = cumulative(weights)
    states_in = {}
    for i, reg in enumerate(state_region):
        states_in.setdefault(reg, []).append(i)
    region_activity = {reg: cumulative(weights[i] for i in members)
                       for reg, members in states_in.items()}

    def partner(h):
        if rng.random() < args.locality:
            members = states_in[state_region[h]]
            return members[preferential(rng, region_activity[state_region[h]], 1)[0]]
        return preferential(rng, activity, 1)[0]

    diplomatic = core_rel.index("diplomatic relation") if "diplomatic relation" in core_rel else 0
    for a in major:
        for b in major:
            if a != b and rng.random() < args.major_density:
                core_edges.add((a, b, diplomatic))
    while len(core_edges) < args.core_facts:
        h = preferential(rng, activity, 1)[0]
        t = partner(h)
        if h == t:
            continue
        r = rng.choices(range(len(core_rel)), weights=core_rel_weights)[0]
        core_edges.add((h, t, r))

    rel_by_kind = {}
    for j, (kind, _) in enumerate(attr_rel):
        rel_by_kind.setdefault(kind, []).append(j)
    attr_popularity = [rng.paretovariate(args.attribute_tail) for _ in range(args.attributes)]
    # Region -1 holds attributes shared worldwide.
    attr_region = [-1 if rng.random() < args.global_attributes else rng.randrange(args.regions)
                   for _ in range(args.attributes)]
    pools = {}
    for i, (_, kind) in enumerate(attr):
        pools.setdefault((kind, attr_region[i]), []).append(i)
    pool_cum = {k: cumulative(attr_popularity[i] for i in pool) for k, pool in pools.items()}

    def pick_attribute(kind, region):
        key = (kind, region if rng.random() < args.locality else -1)
        if key not in pools:
            key = next((k for k in ((kind, region), (kind, -1)) if k in pools), None)
            if key is None:
                key = rng.choice([k for k in pools if k[0] == kind])
        return pools[key][preferential(rng, pool_cum[key], 1)[0]]

    attr_edges = set()
    # Every attribute entity gets at least one fact, from a state of its region.
    order = list(range(args.attributes))
    rng.shuffle(order)
    for a in order:
        if len(attr_edges) >= args.attribute_facts:
            break
        reg = attr_region[a]
        if reg >= 0 and reg in states_in:
            h = states_in[reg][preferential(rng, region_activity[reg], 1)[0]]
        else:
            h = preferential(rng, activity, 1)[0]
        rels = rel_by_kind[attr[a][1]]
        attr_edges.add((h, a, rng.choice(rels[:max(1, len(rels) // 2)])))
    while len(attr_edges) < args.attribute_facts:
        h = preferential(rng, activity, 1)[0]
        kind = rng.choices(kinds, weights=kind_weights)[0]
        a = pick_attribute(kind, state_region[h])
        rels = rel_by_kind[kind]
        r = rels[min(int(rng.expovariate(0.35)), len(rels) - 1)]
        attr_edges.add((h, a, r))

    os.makedirs(args.out, exist_ok=True)

    def write(name, header, rows):
        with open(os.path.join(args.out, name), "w", newline="") as f:
            w = csv.writer(f, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_NONE,
                           escapechar="\\")
            w.writerow(header)
            w.writerows(rows)

    write("entities.tsv", ["id", "label"], [(f"C{i}", l) for i, l in enumerate(core_labels)])
    write("attributes.tsv", ["id", "label"], [(f"A{i}", l) for i, (l, _) in enumerate(attr)])
    write("relations.tsv", ["id", "label"], [(f"R{i}", l) for i, l in enumerate(core_rel)])
    write("attribute_relations.tsv", ["id", "label"],
          [(f"S{j}", l) for j, (_, l) in enumerate(attr_rel)])
    write("edges.tsv", ["head", "tail", "relation"],
          [(f"C{h}", f"C{t}", f"R{r}") for h, t, r in sorted(core_edges)])
    write("attribute_edges.tsv", ["head", "tail", "relation"],
          [(f"C{h}", f"A{a}", f"S{r}") for h, a, r in sorted(attr_edges)])
    cats = [(f"C{i}", "Country") for i in range(args.core)]
    cats += [(f"A{i}", ATTRIBUTE_KINDS[k][0]) for i, (_, k) in enumerate(attr)]
    write("categories.tsv", ["entity_id", "category"], cats)
    print(f"{args.out}: {args.core} core, {args.attributes} attribute entities, "
          f"{len(core_edges)} core and {len(attr_edges)} attribute facts")


if __name__ == "__main__":
    main()
