"""Synthetic corpus generator for desk-scale evaluation.

Emits meta-model-shaped models (EPackage / EClass / EAttribute / EReference /
EEnum / EEnumLiteral objects) whose element names come from per-domain word
pools: a small core of words reused across a domain's models plus rarer
two-word combinations, so name document frequencies span the same spectrum as
a real repository. A spanning tree over the references keeps every class
reachable from a root, which the mutation radius step relies on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..model import Model, ModelObject

__all__ = ["DOMAIN_POOLS", "SynthCorpus", "generate_model", "generate_corpus"]

DOMAIN_POOLS: dict[str, list[str]] = {
    "library": ["book", "loan", "shelf", "author", "member", "catalog", "borrow",
                "isbn", "copy", "branch", "librarian", "reservation", "fine",
                "journal", "volume", "archive", "reader", "publisher", "edition",
                "binding", "desk", "periodical"],
    "banking": ["account", "ledger", "deposit", "teller", "overdraft", "mortgage",
                "interest", "balance", "statement", "cheque", "vault", "currency",
                "transfer", "payee", "iban", "branch", "credit", "debit",
                "installment", "collateral", "fee", "audit"],
    "railway": ["train", "track", "signal", "platform", "station", "locomotive",
                "wagon", "timetable", "junction", "switch", "conductor", "route",
                "crossing", "depot", "carriage", "freight", "ticket", "gauge",
                "semaphore", "siding", "axle", "buffer"],
    "hospital": ["patient", "ward", "doctor", "nurse", "diagnosis", "treatment",
                 "admission", "discharge", "prescription", "dosage", "surgery",
                 "clinic", "appointment", "symptom", "vaccine", "chart", "triage",
                 "ambulance", "pathology", "therapy", "scan", "bed"],
    "airline": ["flight", "passenger", "boarding", "gate", "runway", "aircraft",
                "cabin", "crew", "luggage", "itinerary", "fare", "layover",
                "altitude", "pilot", "steward", "hangar", "manifest", "seat",
                "terminal", "turbine", "fuselage", "cargo"],
    "retail": ["product", "basket", "checkout", "inventory", "supplier", "price",
               "discount", "receipt", "warehouse", "shipment", "barcode", "refund",
               "customer", "promotion", "aisle", "stock", "invoice", "cashier",
               "loyalty", "bundle", "catalogue", "margin"],
    "music": ["song", "album", "artist", "playlist", "genre", "tempo", "chord",
              "lyric", "concert", "venue", "instrument", "melody", "rhythm",
              "studio", "label", "track", "chorus", "verse", "royalty", "score",
              "ensemble", "conductor"],
    "cooking": ["recipe", "ingredient", "oven", "portion", "seasoning", "utensil",
                "whisk", "simmer", "garnish", "menu", "course", "dough", "broth",
                "marinade", "skillet", "pantry", "chef", "serving", "glaze",
                "crust", "batter", "ladle"],
    "astronomy": ["telescope", "orbit", "planet", "comet", "nebula", "galaxy",
                  "eclipse", "observatory", "satellite", "asteroid", "spectrum",
                  "quasar", "parallax", "constellation", "meteor", "luminosity",
                  "aperture", "azimuth", "transit", "crater", "horizon", "zenith"],
    "farming": ["harvest", "tractor", "field", "crop", "irrigation", "silo",
                "pasture", "seedling", "fertilizer", "orchard", "livestock",
                "barn", "plough", "furrow", "grain", "dairy", "shepherd", "fence",
                "meadow", "compost", "yield", "windmill"],
    "chess": ["pawn", "rook", "bishop", "knight", "gambit", "castling", "endgame",
              "opening", "tournament", "grandmaster", "stalemate", "sacrifice",
              "tempo", "zugzwang", "file", "rank", "promotion", "blitz", "clock",
              "notation", "arbiter", "variation"],
    "weather": ["forecast", "humidity", "pressure", "storm", "rainfall", "drought",
                "thunder", "blizzard", "barometer", "climate", "monsoon", "frost",
                "hail", "gust", "visibility", "overcast", "drizzle", "heatwave",
                "anemometer", "isobar", "dewpoint", "cyclone"],
    "mining": ["shaft", "ore", "drill", "tunnel", "seam", "excavator", "quarry",
               "mineral", "smelter", "conveyor", "blast", "prospect", "lode",
               "gallery", "ventilation", "haulage", "assay", "tailings", "drift",
               "winch", "bore", "crusher"],
    "theatre": ["stage", "actor", "script", "rehearsal", "curtain", "audience",
                "costume", "prop", "director", "matinee", "intermission",
                "spotlight", "backstage", "audition", "troupe", "playwright",
                "scenery", "understudy", "premiere", "dialogue", "monologue",
                "balcony"],
    "shipping": ["vessel", "harbor", "container", "anchor", "voyage", "captain",
                 "deck", "ballast", "manifest", "mooring", "tugboat", "quay",
                 "stevedore", "bulkhead", "draught", "lighthouse", "buoy",
                 "customs", "freighter", "hull", "keel", "porthole"],
    "gardening": ["flower", "compost", "trowel", "greenhouse", "mulch", "pruner",
                  "perennial", "bulb", "trellis", "hedge", "lawn", "sprinkler",
                  "weed", "pollinator", "bloom", "nursery", "graft", "shrub",
                  "rootstock", "terrace", "bed", "canopy"],
    "photography": ["camera", "lens", "shutter", "exposure", "tripod", "negative",
                    "darkroom", "flash", "focus", "zoom", "filter", "viewfinder",
                    "portrait", "landscape", "film", "pixel", "contrast",
                    "saturation", "panorama", "bokeh", "collage", "print"],
    "brewing": ["barley", "hop", "yeast", "mash", "ferment", "keg", "malt",
                "lager", "stout", "brewery", "bottle", "carbonation", "wort",
                "kettle", "cask", "tap", "ale", "pint", "gravity", "filtration",
                "cellar", "foam"],
    "museum": ["exhibit", "artifact", "curator", "gallery", "collection",
               "restoration", "provenance", "acquisition", "donor", "vitrine",
               "sculpture", "painting", "antiquity", "catalogue", "docent",
               "archive", "loan", "fossil", "relic", "plaque", "wing", "atrium"],
    "firefighting": ["hydrant", "hose", "ladder", "alarm", "smoke", "rescue",
                     "extinguisher", "brigade", "siren", "nozzle", "helmet",
                     "arson", "evacuation", "sprinkler", "flashover", "crew",
                     "dispatch", "pumper", "drill", "hazard", "foam", "axe"],
    "postal": ["parcel", "stamp", "envelope", "courier", "sorting", "postmark",
               "mailbox", "registered", "airmail", "postage", "carrier", "bundle",
               "zipcode", "letter", "franking", "depot", "route", "delivery",
               "addressee", "sack", "counter", "telegram"],
    "circus": ["acrobat", "trapeze", "juggler", "ringmaster", "clown", "tightrope",
               "tent", "unicycle", "stilts", "cannon", "lion", "tamer", "parade",
               "popcorn", "arena", "costume", "applause", "somersault", "hoop",
               "caravan", "ticket", "spectacle"],
    "vineyard": ["grape", "vintage", "barrel", "cellar", "tasting", "vine",
                 "harvest", "press", "cork", "bottle", "terroir", "fermentation",
                 "oak", "blend", "acidity", "tannin", "decanter", "sommelier",
                 "appellation", "crush", "trellis", "label"],
    "robotics": ["actuator", "sensor", "gripper", "servo", "kinematics", "payload",
                 "manipulator", "encoder", "gyroscope", "chassis", "firmware",
                 "teleoperation", "waypoint", "torque", "joint", "gearbox",
                 "battery", "drivetrain", "lidar", "beacon", "docking", "arm"],
}

_GENERIC = ["name", "id", "kind", "status", "count", "level", "code", "owner",
            "value", "group", "entry", "item", "record", "type", "unit"]


@dataclass
class SynthCorpus:
    models: list[tuple[str, Model]] = field(default_factory=list)
    labels: dict[str, str] = field(default_factory=dict)  # model id -> domain

    def ids(self) -> list[str]:
        return [mid for mid, _ in self.models]


def _camel(words) -> str:
    return "".join(w.capitalize() for w in words)


def _feature_name(words) -> str:
    first, *rest = words
    return first + "".join(w.capitalize() for w in rest)


def generate_model(model_id: str, domain: str, rng: random.Random,
                   n_classes: int = 24, model_type: str = "ecore") -> Model:
    """One meta-model-shaped synthetic model over the domain's word pool."""
    pool = DOMAIN_POOLS[domain]
    core = pool[:10]
    objects: list[ModelObject] = []
    class_ids: list[str] = []
    feature_total = 0

    def class_name() -> str:
        if rng.random() < 0.45:
            return _camel([rng.choice(core)])
        return _camel([rng.choice(pool), rng.choice(pool)])

    def feat_name() -> str:
        if rng.random() < 0.5:
            return _feature_name([rng.choice(core), rng.choice(_GENERIC)])
        return _feature_name([rng.choice(pool)])

    pkg_id = f"{model_id}.pkg"
    classifier_ids: list[str] = []
    supertypes: dict[str, list[str]] = {}
    features: dict[str, list[str]] = {}
    feature_objs: list[ModelObject] = []

    for c in range(n_classes):
        cid = f"{model_id}.c{c}"
        class_ids.append(cid)
        classifier_ids.append(cid)
        features[cid] = []
        supertypes[cid] = []

    # Attributes: 1-2 per class.
    for cid in class_ids:
        for a in range(rng.randint(1, 2)):
            aid = f"{cid}.a{a}"
            feature_objs.append(ModelObject(aid, "EAttribute",
                                            {"name": (feat_name(),)}))
            features[cid].append(aid)
            feature_total += 1

    # References: a spanning tree for connectivity plus random extras.
    ref_count = 0

    def add_ref(owner: str, target: str):
        nonlocal ref_count
        rid = f"{owner}.r{len(features[owner])}"
        feature_objs.append(ModelObject(rid, "EReference",
                                        {"name": (feat_name(),)},
                                        {"eType": (target,)}))
        features[owner].append(rid)
        ref_count += 1

    for i in range(1, n_classes):
        add_ref(class_ids[rng.randrange(i)], class_ids[i])
    extra = max(0, int(1.3 * n_classes) - ref_count)
    for _ in range(extra):
        add_ref(rng.choice(class_ids), rng.choice(class_ids))

    # Inheritance for ~20% of classes.
    for i, cid in enumerate(class_ids):
        if i and rng.random() < 0.2:
            supertypes[cid].append(class_ids[rng.randrange(i)])

    # Enumerations.
    enum_ids = []
    literal_objs = []
    for e in range(rng.randint(1, 2)):
        eid = f"{model_id}.e{e}"
        lit_ids = []
        for li in range(rng.randint(2, 4)):
            lid = f"{eid}.l{li}"
            literal_objs.append(ModelObject(lid, "EEnumLiteral",
                                            {"name": (rng.choice(pool),)}))
            lit_ids.append(lid)
        enum_ids.append((eid, lit_ids))
        classifier_ids.append(eid)

    objects.append(ModelObject(pkg_id, "EPackage",
                               {"name": (_feature_name([domain, "pkg"]),)},
                               {"eClassifiers": tuple(classifier_ids)}))
    for cid in class_ids:
        refs: dict[str, tuple[str, ...]] = {}
        if features[cid]:
            refs["eStructuralFeatures"] = tuple(features[cid])
        if supertypes[cid]:
            refs["eSuperTypes"] = tuple(supertypes[cid])
        objects.append(ModelObject(cid, "EClass", {"name": (class_name(),)}, refs))
    objects.extend(feature_objs)
    for eid, lit_ids in enum_ids:
        objects.append(ModelObject(eid, "EEnum", {"name": (_camel([rng.choice(pool)]),)},
                                   {"eLiterals": tuple(lit_ids)}))
    objects.extend(literal_objs)
    return Model(model_type=model_type, objects=tuple(objects), source_uri=model_id)


def generate_corpus(n_models: int, seed: int = 0, class_range: tuple[int, int] = (22, 34),
                    domains: list[str] | None = None,
                    model_type: str = "ecore") -> SynthCorpus:
    """A corpus of ``n_models`` synthetic models spread over the domains."""
    domains = list(domains or DOMAIN_POOLS)
    corpus = SynthCorpus()
    for i in range(n_models):
        domain = domains[i % len(domains)]
        rng = random.Random(seed * 1_000_003 + i)
        model_id = f"synth-{i:04d}"
        n_classes = rng.randint(*class_range)
        model = generate_model(model_id, domain, rng, n_classes, model_type)
        corpus.models.append((model_id, model))
        corpus.labels[model_id] = domain
    return corpus
