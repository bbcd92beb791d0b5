#!/usr/bin/env python3
"""Independent corpus-stats counter.

Recomputes the stats report for a dataset + metadata pair from scratch
(no shared code with the Rust crate) so the committed golden file is an
independent oracle. Regenerate with:

    python3 tools/golden_stats.py \
        crates/visionreader/data/corpus_fixture.jsonl \
        crates/visionreader/data/books_fixture.jsonl \
        > crates/visionreader/data/golden_stats.json
"""

import json
import re
import sys
import unicodedata

EXTRANEOUS = [
    re.compile(r"tái bản(\s+\d{4})?", re.IGNORECASE),
    re.compile(r"tặng kèm.*$", re.IGNORECASE),
    re.compile(r"bìa cứng", re.IGNORECASE),
    re.compile(r"bìa mềm", re.IGNORECASE),
]

CATEGORIES = ["author", "title", "publisher", "translator", "genre"]


def strip_punct(text):
    return "".join(c for c in text if not unicodedata.category(c).startswith("P"))


def clean(text):
    text = strip_punct(text)
    for pattern in EXTRANEOUS:
        text = pattern.sub("", text)
    collapsed = " ".join(text.split())
    return collapsed or None


def main(dataset_path, meta_path):
    records = [json.loads(line) for line in open(dataset_path, encoding="utf-8")]
    books = [json.loads(line) for line in open(meta_path, encoding="utf-8")]

    images = {r["image_id"] for r in records}
    n = len(records)
    per_category = {c: 0 for c in CATEGORIES}
    q_tokens = 0
    a_tokens = 0
    for r in records:
        per_category[r["category"]] += 1
        q_tokens += len(r["question"].split())
        a_tokens += len(r["answer"].split())

    unique = {c: set() for c in CATEGORIES}
    for book in books:
        for c in CATEGORIES:
            value = book.get(c)
            if value is None:
                continue
            cleaned = clean(value)
            if cleaned:
                unique[c].add(cleaned)

    stats = {
        "images": len(images),
        "questions": n,
        "answers": n,
        "per_category": {c: per_category[c] for c in sorted(CATEGORIES)},
        "unique_authors": len(unique["author"]),
        "unique_titles": len(unique["title"]),
        "unique_publishers": len(unique["publisher"]),
        "unique_translators": len(unique["translator"]),
        "unique_genres": len(unique["genre"]),
        "avg_question_len": q_tokens / n if n else 0.0,
        "avg_answer_len": a_tokens / n if n else 0.0,
        "avg_questions_per_image": n / len(images) if images else 0.0,
    }
    json.dump(stats, sys.stdout, ensure_ascii=False, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
