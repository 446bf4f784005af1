#!/usr/bin/env python3
"""Writes the synthetic 200-record QA fixture (deterministic).

Usage: make_fixture.py [out.jsonl]
"""

import json
import random
import sys

SEED = 20240611

# category -> (subjects, circumstances); each question combines one of each
CATEGORIES = {
    "fiqh_ibadah": (
        [
            "the dawn prayer", "the noon prayer", "the night witr prayer", "congregational friday sermon",
            "ritual ablution wudu", "dry ablution tayammum", "ramadan fasting", "voluntary monday fasting",
            "zakat on gold", "zakat on harvested crops", "the hajj pilgrimage", "the umrah pilgrimage",
            "eid festival prayer", "funeral janazah prayer", "prostration of forgetfulness", "the call adhan",
            "spiritual retreat itikaf", "fidyah compensation payments", "qada makeup fasts", "travel shortened qasr prayers",
            "menstruation purity rules", "ghusl full bath", "tarawih night prayers", "qurban animal sacrifice",
        ],
        [
            "while travelling abroad by airplane", "during severe chronic illness", "for elderly frail people",
            "inside a crowded shopping mall", "when heavy rain floods roads", "for pregnant nursing mothers",
            "during long hospital night shifts", "for newly converted muslims", "when missed through forgetfulness",
            "in polar regions with endless daylight", "during university examination weeks", "for children nearing puberty",
        ],
    ),
    "muamalah": (
        [
            "interest bearing bank loans", "murabaha cost plus financing", "mudarabah profit sharing", "islamic home mortgages",
            "cryptocurrency trading", "stock market investing", "conventional car insurance", "takaful cooperative insurance",
            "inheritance shares for daughters", "written debt contracts", "pawning valuables rahn", "leasing ijarah agreements",
            "selling goods not yet owned", "dropshipping online stores", "commission based brokerage", "gold jewellery exchange",
        ],
        [
            "for small family businesses", "between close business partners", "across international borders",
            "under modern banking regulations", "when prices fluctuate wildly", "for university student borrowers",
            "in rural farming villages", "through mobile payment apps",
        ],
    ),
    "aqidah": (
        [
            "belief in divine decree qadar", "the unseen angels", "the day of judgement", "the revealed scriptures",
            "the final prophethood", "the oneness tawhid", "intercession shafaah", "the punishment of graves",
            "signs preceding resurrection", "jinn and sorcery", "the attributes of allah", "sincere repentance tawbah",
        ],
        [
            "explained to curious teenagers", "according to classical theologians", "compared with other religions",
            "when doubts arise suddenly", "as taught in early generations",
        ],
    ),
    "akhlak": (
        [
            "honouring elderly parents", "backbiting ghibah", "keeping promises", "patience sabr",
            "humility tawadu", "controlling anger", "kindness toward neighbours", "truthful speech",
            "gratitude shukr", "generosity toward orphans",
        ],
        [
            "in busy workplace environments", "on social media platforms", "within extended family gatherings",
        ],
    ),
    "tafsir_history": (
        [
            "surah al fatihah meanings", "ayat al kursi commentary", "the migration hijrah", "the battle of badr",
            "compilation of the mushaf", "surah yasin themes", "the treaty of hudaybiyyah",
        ],
        [
            "for beginner study circles", "according to famous exegetes",
        ],
    ),
}

TEMPLATES = [
    "What is the correct ruling regarding {s} {c} according to mainstream scholars?",
    "How should a sincere believer properly handle {s} {c} in everyday practice?",
    "Could you clearly explain the detailed guidance concerning {s} {c} for ordinary people?",
    "Which conditions make {s} valid and acceptable {c} based on authentic evidence?",
    "Why do jurists sometimes disagree about {s} {c} and which opinion seems strongest?",
]

# 200 records in the 47/23/15/10/5 mix
COUNTS = {"fiqh_ibadah": 94, "muamalah": 46, "aqidah": 30, "akhlak": 20, "tafsir_history": 10}
N_DUPLICATES = 6   # near-verbatim repeats of earlier questions
N_SHORT = 4        # answers under twenty words

ANSWER_OPENERS = [
    "Scholars explain that {s} {c} follows clear principles drawn from the Quran and the Sunnah.",
    "The guidance on {s} {c} rests on evidence reported by trustworthy narrators.",
    "Regarding {s} {c}, the classical manuals give a consistent and practical answer.",
]
ANSWER_BODY = [
    "The believer should intend the act sincerely and perform it with attention.",
    "Hardship is a recognised reason for ease, so the rule is lightened when real difficulty exists.",
    "Where the texts are silent, jurists reason by analogy from similar cases.",
    "A person who is unsure should consult a qualified local teacher before acting.",
    "Intention matters greatly, and mistakes made in good faith are forgiven.",
    "The community is encouraged to help anyone who struggles to fulfil this duty.",
    "Records from the companions show that they applied this rule with gentleness.",
    "Customs of the place may shape the details as long as no clear text is broken.",
    "Excess and neglect are both discouraged, and the middle path is praised.",
    "Knowledge should be sought from reliable sources rather than rumours.",
]


def answer_for(rng, subject, circ, long_form):
    parts = [rng.choice(ANSWER_OPENERS).format(s=subject, c=circ)]
    n_body = 28 if long_form else rng.randint(2, 4)
    body = [rng.choice(ANSWER_BODY) for _ in range(n_body)]
    parts += body
    parts.append(f"In short, {subject} {circ} should be approached with knowledge and sincerity.")
    return " ".join(parts)


def main():
    rng = random.Random(SEED)
    out_path = sys.argv[1] if len(sys.argv) > 1 else "qa_fixture_200.jsonl"

    records = []
    for cat, count in COUNTS.items():
        subjects, circs = CATEGORIES[cat]
        n_dup = N_DUPLICATES if cat == "fiqh_ibadah" else 0
        n_short = N_SHORT if cat == "muamalah" else 0
        n_unique = count - n_dup
        combos = [(s, c) for s in subjects for c in circs]
        rng.shuffle(combos)
        if len(combos) < n_unique:
            raise SystemExit(f"not enough combinations for {cat}")
        chosen = combos[:n_unique]
        cat_records = []
        for i, (s, c) in enumerate(chosen):
            template = TEMPLATES[(i + len(s)) % len(TEMPLATES)]
            question = template.format(s=s, c=c)
            long_form = cat == "fiqh_ibadah" and i % 30 == 7
            answer = answer_for(rng, s, c, long_form)
            if i < n_short:
                answer = f"It depends on {s} {c}."
            cat_records.append({"question": question, "answer": answer, "category": cat})
        for k in range(n_dup):
            src = cat_records[k * 5 + 1]
            question = "<p>" + src["question"].replace(" ", "  ", 2) + "</p>"
            cat_records.append({"question": question, "answer": src["answer"] + " Allah knows best.",
                                "category": cat})
        records += cat_records

    rng.shuffle(records)
    with open(out_path, "w", encoding="utf-8") as f:
        for i, r in enumerate(records):
            row = {"id": f"q_{i:04d}", **r, "source_ref": "synthetic"}
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
