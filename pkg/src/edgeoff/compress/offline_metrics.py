"""Offline accuracy and hallucination metrics over JSONL corpora."""

import json


def read_jsonl(path):
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _keyed(records, key, value_field):
    out = {}
    for rec in records:
        out[rec[key]] = rec[value_field]
    return out


def offline_accuracy(predictions, references):
    """Fraction of records whose reference answer appears (case-folded) as a
    substring of the prediction. Records are matched by id."""
    preds = _keyed(predictions, "id", "prediction")
    refs = _keyed(references, "id", "answer")
    if set(preds) != set(refs):
        missing = set(preds) ^ set(refs)
        raise KeyError(f"prediction/reference ids do not match: {sorted(missing)[:5]}")
    if not refs:
        raise ValueError("empty corpus")
    hits = sum(1 for i in refs if refs[i].casefold() in preds[i].casefold())
    return hits / len(refs)


def offline_hallucination(articles):
    """1 - (total factual sentences) / (total sentences), pooled over articles."""
    total = 0
    factual = 0
    for rec in articles:
        labels = rec["labels"]
        if not labels:
            raise ValueError(f"article {rec.get('article_id')} has no sentence labels")
        if any(lab not in (0, 1) for lab in labels):
            raise ValueError("sentence labels must be 0 or 1")
        total += len(labels)
        factual += sum(labels)
    if total == 0:
        raise ValueError("empty corpus")
    return 1.0 - factual / total
