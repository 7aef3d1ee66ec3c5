"""Independent token counter for the 50-comment fixture.

Writes the top-5 content tokens and the vocabulary diversity (distinct
content tokens / content tokens) that the C++ statistics must reproduce.
"""
import json
import re
import sys
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
CORPUS = ROOT / "tests" / "fixtures" / "corpus" / "comments50.jsonl"
STOPWORDS = ROOT / "data" / "stopwords" / "english_v1.txt"
OUT = ROOT / "tests" / "fixtures" / "corpus" / "comments50.expected.json"


def main():
    stop = {w.strip() for w in STOPWORDS.read_text().splitlines() if w.strip() and not w.startswith("#")}
    counts = Counter()
    for line in CORPUS.read_text(encoding="utf-8").splitlines():
        text = json.loads(line)["text"]
        assert text.isascii(), "the oracle only handles ASCII text"
        counts.update(t for t in re.findall(r"[a-z0-9_]+", text.lower()) if t not in stop)
    total = sum(counts.values())
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
    result = {
        "top5": [{"token": t, "count": n} for t, n in top],
        "total_tokens": total,
        "distinct_tokens": len(counts),
        "vocab_diversity": len(counts) / total,
    }
    text = json.dumps(result, indent=2) + "\n"
    if "--check" in sys.argv:
        sys.exit(0 if OUT.read_text() == text else 1)
    OUT.write_text(text)
    print(text, end="")


if __name__ == "__main__":
    main()
