#!/usr/bin/env python3
"""Regenerates the offline fixture corpus under fixtures/.

OAI-PMH responses, detection documents and the reconciliation fixture are
all written from the constants below. Run from the repository root:

    python3 fixtures/generate.py
"""

import json
import random
import unicodedata
from pathlib import Path
from xml.sax.saxutils import escape

ROOT = Path(__file__).resolve().parent
OAI_NS = "http://www.openarchives.org/OAI/2.0/"
N_RECORDS = 150
PAGE_SIZE = 50
DELETED = {77}

CREATORS = [
    "Jan Długosz",
    "Mikołaj  Kopernik",
    "Wincenty Kadłubek",
    "Maciej z Miechowa",
    "Stanisław ze Skarbimierza",
    "Paweł Włodkowic",
    "Jakub z Paradyża",
    "Mateusz z Krakowa",
]
SUBJECTS = ["Liturgy", "Astronomy", "Chronicles", "Canon law", "Sermons", "Medicine"]
LANGS = ["lat", "pol", "ger"]


def envelope(verb, body, request_attrs=""):
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<OAI-PMH xmlns="{OAI_NS}" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance">\n'
        "  <responseDate>2024-05-01T12:00:00Z</responseDate>\n"
        f'  <request verb="{verb}"{request_attrs}>http://fixture.invalid/oai</request>\n'
        f"{body}"
        "</OAI-PMH>\n"
    )


def identify():
    body = (
        "  <Identify>\n"
        "    <repositoryName>Fixture Manuscript Library</repositoryName>\n"
        "    <baseURL>http://fixture.invalid/oai</baseURL>\n"
        "    <protocolVersion>2.0</protocolVersion>\n"
        "    <adminEmail>admin@fixture.invalid</adminEmail>\n"
        "    <earliestDatestamp>2023-01-01</earliestDatestamp>\n"
        "    <deletedRecord>persistent</deletedRecord>\n"
        "    <granularity>YYYY-MM-DD</granularity>\n"
        "  </Identify>\n"
    )
    return envelope("Identify", body)


def dc_fields(i):
    title = f"Codex {i}: {SUBJECTS[i % len(SUBJECTS)]}"
    if i == 1:
        title = "Psalterium   cum  calendario"
    if i == 2:
        # Decomposed e + combining acute, normalized to NFC on parse.
        title = "Graduale Cracovie\u0301nse"
    fields = [
        ("title", title),
        ("creator", CREATORS[i % len(CREATORS)]),
        ("date", str(1400 + i % 100)),
        ("subject", SUBJECTS[i % len(SUBJECTS)]),
        ("subject", SUBJECTS[(i + 1) % len(SUBJECTS)]),
        ("type", "Text"),
        ("language", LANGS[i % len(LANGS)]),
        ("identifier", f"https://fixture.invalid/ms/{i}"),
        ("rights", "Public domain"),
    ]
    if i % 10 == 0:
        fields.append(("coverage", "Kraków"))
    if i % 7 == 0:
        fields.append(("subject", SUBJECTS[i % len(SUBJECTS)]))
    return fields


def record(i):
    ident = f"oai:jbc:{i}"
    stamp = f"2023-{1 + i % 12:02d}-{1 + i % 28:02d}"
    sets = "      <setSpec>mss</setSpec>\n"
    if i % 5 == 0:
        sets += "      <setSpec>incunabula</setSpec>\n"
    if i in DELETED:
        return (
            "    <record>\n"
            '      <header status="deleted">\n'
            f"        <identifier>{ident}</identifier>\n"
            f"        <datestamp>{stamp}</datestamp>\n"
            f"  {sets}"
            "      </header>\n"
            "    </record>\n"
        )
    dc = "".join(f"          <dc:{k}>{escape(v)}</dc:{k}>\n" for k, v in dc_fields(i))
    return (
        "    <record>\n"
        "      <header>\n"
        f"        <identifier>{ident}</identifier>\n"
        f"        <datestamp>{stamp}</datestamp>\n"
        f"  {sets}"
        "      </header>\n"
        "      <metadata>\n"
        '        <oai_dc:dc xmlns:oai_dc="http://www.openarchives.org/OAI/2.0/oai_dc/"'
        ' xmlns:dc="http://purl.org/dc/elements/1.1/">\n'
        f"{dc}"
        "        </oai_dc:dc>\n"
        "      </metadata>\n"
        "    </record>\n"
    )


def list_records_page(page, pages, token_attrs=True):
    lo = page * PAGE_SIZE + 1
    body = "  <ListRecords>\n"
    body += "".join(record(i) for i in range(lo, lo + PAGE_SIZE))
    cursor = page * PAGE_SIZE
    token = "" if page + 1 == pages else f"page:{page + 2}"
    body += f'    <resumptionToken completeListSize="{N_RECORDS}" cursor="{cursor}">{token}</resumptionToken>\n'
    body += "  </ListRecords>\n"
    attrs = ' metadataPrefix="oai_dc"' if page == 0 else f' resumptionToken="page:{page + 1}"'
    return envelope("ListRecords", body, attrs)


def error(verb, code, message, attrs=""):
    return envelope(verb, f'  <error code="{code}">{escape(message)}</error>\n', attrs)


FIRST = "verb=ListRecords&metadataPrefix=oai_dc"
TOKEN2 = "verb=ListRecords&resumptionToken=page%3A2"
TOKEN3 = "verb=ListRecords&resumptionToken=page%3A3"


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_json(path, value):
    write(path, json.dumps(value, indent=2, ensure_ascii=False) + "\n")


def oai_fixtures():
    pages = N_RECORDS // PAGE_SIZE
    repo = ROOT / "oai" / "repository"
    write(repo / "identify.xml", identify())
    for p in range(pages):
        write(repo / f"page{p + 1}.xml", list_records_page(p, pages))
    write_json(
        repo / "manifest.json",
        {
            "verb=Identify": "identify.xml",
            FIRST: "page1.xml",
            # One injected 503 before page 2 is served.
            TOKEN2: [{"status": 503, "retry_after": "1"}, "page2.xml"],
            TOKEN3: "page3.xml",
        },
    )

    expired = ROOT / "oai" / "expired"
    write(expired / "identify.xml", identify())
    write(expired / "page1.xml", list_records_page(0, pages))
    write(
        expired / "expired.xml",
        error("ListRecords", "badResumptionToken", "The resumption token has expired.", ' resumptionToken="page:2"'),
    )
    write_json(expired / "manifest.json", {"verb=Identify": "identify.xml", FIRST: "page1.xml", TOKEN2: "expired.xml"})

    empty = ROOT / "oai" / "empty"
    write(empty / "identify.xml", identify())
    write(
        empty / "norecords.xml",
        error("ListRecords", "noRecordsMatch", "No records in set 'empty'.", ' metadataPrefix="oai_dc" set="empty"'),
    )
    write_json(
        empty / "manifest.json",
        {"verb=Identify": "identify.xml", "verb=ListRecords&metadataPrefix=oai_dc&set=empty": "norecords.xml"},
    )


def region(rid, cls, bbox, conf):
    return {"id": rid, "class": cls, "bbox": bbox, "confidence": conf}


def page(n, regions, w=2000, h=3000):
    return {
        "page_number": n,
        "image_uri": f"https://fixture.invalid/iiif/jbc/{n}.jpg",
        "width_px": w,
        "height_px": h,
        "regions": regions,
    }


def detection_fixtures():
    out = ROOT / "detections"
    # A single page carrying a stamp, an initial, a header, an ornament and
    # two paragraphs; the stamp sits inside the lower paragraph.
    fig1 = {
        "schema_version": "1.0",
        "manuscript_id": "oai:jbc:1",
        "detector": "fixture",
        "pages": [
            page(
                1,
                [
                    region("h1", "header", [0.10, 0.05, 0.80, 0.08], 0.93),
                    region("i1", "initial", [0.10, 0.15, 0.12, 0.12], 0.88),
                    region("p1", "paragraph", [0.08, 0.14, 0.84, 0.35], 0.95),
                    region("p2", "paragraph", [0.08, 0.52, 0.84, 0.30], 0.91),
                    region("s1", "stamp", [0.60, 0.60, 0.15, 0.10], 0.87),
                    region("o1", "ornament", [0.30, 0.86, 0.40, 0.08], 0.80),
                ],
            )
        ],
    }
    write_json(out / "oai%3Ajbc%3A1.json", fig1)

    write_json(
        out / "oai%3Ajbc%3A2.json",
        {
            "schema_version": "1.0",
            "manuscript_id": "oai:jbc:2",
            "pages": [
                page(
                    1,
                    [
                        region("a", "paragraph", [0.10, 0.10, 0.80, 0.40], 0.97),
                        # Near-duplicate of "a"; removed by de-duplication.
                        region("b", "paragraph", [0.11, 0.11, 0.80, 0.40], 0.60),
                        region("c", "description", [0.10, 0.60, 0.50, 0.10], 0.85),
                    ],
                ),
                page(2, [region("a", "sign", [0.40, 0.40, 0.05, 0.05], 0.70)]),
            ],
        },
    )

    write_json(
        out / "oai%3Ajbc%3A3.json",
        {
            "schema_version": "1.0",
            "manuscript_id": "oai:jbc:3",
            "pages": [
                page(
                    1,
                    [
                        region("t", "paragraph", [0.10, 0.10, 0.80, 0.30], 0.90),
                        region("st1", "stain", [0.50, 0.50, 0.25, 0.20], 0.75),
                        region("st2", "stain", [0.10, 0.80, 0.10, 0.10], 0.70),
                    ],
                ),
                page(
                    2,
                    [
                        region("sg", "signature", [0.60, 0.85, 0.30, 0.08], 0.82),
                        region("im", "image", [0.20, 0.20, 0.60, 0.50], 0.94),
                        region("sp", "stamp", [0.05, 0.05, 0.10, 0.10], 0.90),
                    ],
                ),
            ],
        },
    )

    write_json(
        out / "oai%3Ajbc%3A10.json",
        {
            "schema_version": "1.0",
            "manuscript_id": "oai:jbc:10",
            "pages": [
                page(
                    1,
                    [
                        region("im", "image", [0.10, 0.10, 0.80, 0.60], 0.92),
                        region("or", "ornament", [0.00, 0.90, 1.00, 0.10], 0.81),
                        region("st", "stain", [0.00, 0.00, 0.60, 0.50], 0.77),
                    ],
                )
            ],
        },
    )


def normalize_name(s):
    s = "".join(c for c in unicodedata.normalize("NFKD", s) if not unicodedata.category(c).startswith("M"))
    return " ".join(s.lower().split())


def jaro_winkler(a, b):
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    window = max(0, max(len(a), len(b)) // 2 - 1)
    used = [False] * len(b)
    am = []
    for i, ca in enumerate(a):
        for j in range(max(0, i - window), min(len(b), i + window + 1)):
            if not used[j] and b[j] == ca:
                used[j] = True
                am.append(ca)
                break
    m = len(am)
    if m == 0:
        return 0.0
    bm = [c for c, u in zip(b, used) if u]
    t = sum(x != y for x, y in zip(am, bm)) / 2
    j = (m / len(a) + m / len(b) + (m - t) / m) / 3
    prefix = 0
    for x, y in zip(a[:4], b[:4]):
        if x != y:
            break
        prefix += 1
    return j + prefix * 0.1 * (1 - j)


RECON_NAMES = [
    "Jan Długosz", "Mikołaj Kopernik", "Wincenty Kadłubek", "Maciej z Miechowa",
    "Stanisław ze Skarbimierza", "Paweł Włodkowic", "Jakub z Paradyża", "Mateusz z Krakowa",
    "Jan Łaski", "Andrzej Frycz Modrzewski", "Biernat z Lublina", "Mikołaj Rej",
    "Jan Kochanowski", "Klemens Janicki", "Piotr Skarga", "Marcin Kromer",
    "Stanisław Orzechowski", "Jan Ostroróg", "Filip Kallimach", "Conrad Celtis",
    "Liturgy", "Astronomy", "Chronicles", "Canon law", "Sermons", "Medicine",
    "Hedwig of Silesia", "Kraków Academy", "Grzegorz z Sanoka", "Laurentius Corvinus",
]


def mutate(rng, s, edits):
    chars = list(s)
    for _ in range(edits):
        k = rng.randrange(3)
        i = rng.randrange(1, len(chars))
        if k == 0 and len(chars) > 4:
            del chars[i]
        elif k == 1:
            chars.insert(i, rng.choice("aeiouyklmnrstz"))
        else:
            chars[i] = rng.choice("aeiouyklmnrstz")
    return "".join(chars)


def in_band(score, lo, hi, margin=0.005):
    return lo + margin <= score < hi - margin


def recon_fixtures():
    rng = random.Random(20240501)
    answers = {}
    expected = []
    kinds = ["link"] * 10 + ["review"] * 10 + ["reject"] * 10
    rng.shuffle(kinds)
    qid = 1000
    unrelated = ["Zygmunt Stary", "Bona Sforza", "Wit Stwosz", "Kazimierz Jagiellończyk", "Anna Wazówna"]
    for name, kind in zip(RECON_NAMES, kinds):
        q = normalize_name(name)
        entities = []

        def add(label):
            nonlocal qid
            qid += 1
            entities.append({"iri": f"http://www.wikidata.org/entity/Q{qid}", "label": label})

        if kind == "link":
            if rng.random() < 0.5:
                add(name.upper() if rng.random() < 0.5 else normalize_name(name))
            else:
                for _ in range(1000):
                    cand = mutate(rng, name, 1)
                    if jaro_winkler(q, normalize_name(cand)) >= 0.925:
                        break
                add(cand)
        elif kind == "review":
            for _ in range(5000):
                cand = mutate(rng, name, rng.randrange(1, 5))
                if in_band(jaro_winkler(q, normalize_name(cand)), 0.85, 0.92):
                    break
            else:
                raise SystemExit(f"no review-band variant for {name}")
            add(cand)
        else:
            if rng.random() < 0.3:
                pass
            else:
                for _ in range(5000):
                    cand = mutate(rng, name, rng.randrange(4, 9))
                    if jaro_winkler(q, normalize_name(cand)) < 0.84:
                        break
                add(cand)
        # Distractors well below the review band.
        for label in rng.sample(unrelated, rng.randrange(0, 3)):
            if jaro_winkler(q, normalize_name(label)) < 0.84:
                add(label)
        rng.shuffle(entities)
        answers[name] = entities

        scored = sorted(
            ((jaro_winkler(q, normalize_name(e["label"])), e["iri"]) for e in entities),
            key=lambda p: (-p[0], p[1]),
        )
        top = scored[0] if scored else None
        got = "reject"
        if top and top[0] >= 0.92:
            got = "link"
        elif top and top[0] >= 0.85:
            got = "review"
        assert got == kind, (name, kind, scored)
        expected.append(
            {
                "label": name,
                "expected": kind,
                "top_iri": top[1] if top else None,
                "top_score": round(top[0], 12) if top else None,
                "review_iris": sorted(i for s, i in scored if s >= 0.85) if kind == "review" else [],
            }
        )

    write_json(ROOT / "recon" / "client.json", answers)
    write_json(ROOT / "recon" / "labels.json", expected)


def main():
    oai_fixtures()
    detection_fixtures()
    recon_fixtures()


if __name__ == "__main__":
    main()
