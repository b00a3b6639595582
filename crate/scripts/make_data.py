#!/usr/bin/env python3
"""Writes the bundled sample data under crates/core/data."""
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"

NEUTRAL = """
table window garden street coffee market river paper city train bread phone
music movie book school office kitchen weather morning evening weekend bus road
park lunch dinner breakfast shop car bike picture camera laptop screen letter
report meeting project team game match season ticket plane airport beach hill
forest tree flower grass cloud rain snow wind summer winter autumn spring
corner bridge tower station village island ocean lake mountain valley field
farm horse dog cat bird fish chicken pizza pasta salad soup tea juice water
cake cookie apple orange banana lemon tomato potato carrot onion cheese butter
shirt jacket shoe hat bag wallet watch clock door wall floor roof chair bed
lamp sofa shelf box bottle glass plate spoon knife fork cup pen pencil desk
class lesson teacher student exam homework library museum gallery theater
concert festival holiday trip journey travel visit walk run swim drive cook
read write watch listen play build paint draw sing dance clean wash fix plan
""".split()

FAMILY_WORDS = {
    "kindness": "grateful thanks kindness volunteer helping support charity community sharing welcome generous caring".split(),
    "routine": "schedule organized checklist planner tidy deadline finished routine prepared punctual".split(),
    "social": "party friends crowd hangout nightout brunch networking club gathering celebration".split(),
    "pronouns": "i me my myself".split(),
    "conjunctions": "and or but because nor while".split(),
}

PHRASES = {
    "worry": ["overthinking everything", "restless night", "racing thoughts", "constant reminder",
              "checking messages", "waiting reply", "heart racing", "nervous stomach"],
    "curiosity": ["abstract painting", "philosophy podcast", "poetry reading", "documentary series",
                  "science fiction", "jazz improvisation"],
}

EMOTION_WORDS = {
    "joy": "delighted cheerful joyful ecstatic thrilled gleeful elated merry".split(),
    "sadness": "lonely heartbroken gloomy miserable sorrowful tearful depressed hopeless grieving melancholy".split(),
    "anger": "furious outraged irritated enraged resentful livid hostile".split(),
    "disgust": "disgusted revolting gross nauseating repulsive vile".split(),
    "fear": "terrified frightened scared afraid dreading panicked".split(),
    "surprise": "astonished amazed shocked stunned startled speechless".split(),
}

EMOJIS = {
    "joy": ["😀", "😂", "😊", "🥳"],
    "sadness": ["😢", "😭", "💔", "😞"],
    "anger": ["😠", "😡", "🤬"],
    "disgust": ["🤢", "🤮"],
    "fear": ["😱", "😨"],
    "surprise": ["😮", "😲"],
}

SENTIMENT = {
    "grateful": (0.8, 0.0), "welcome": (0.6, 0.0), "caring": (0.7, 0.0), "generous": (0.7, 0.0),
    "delighted": (0.9, 0.0), "cheerful": (0.8, 0.0), "joyful": (0.9, 0.0),
    "lonely": (0.0, 0.7), "heartbroken": (0.0, 0.9), "miserable": (0.0, 0.9), "hopeless": (0.0, 0.8),
    "furious": (0.0, 0.8), "gross": (0.0, 0.6), "terrified": (0.0, 0.8),
}

SYNSETS = {
    "S_sad.a.01": ["sorrowful", "sad", "unhappy"],
    "S_glad.a.01": ["cheerful", "glad", "happy"],
    "S_afraid.a.01": ["afraid", "fearful"],
    "S_angry.a.01": ["furious", "angry", "mad"],
}


def base_spec(n_users, seed):
    return {
        "n_users": n_users,
        "seed": seed,
        "tweets_per_user": [30, 50],
        "words_per_tweet": [6, 12],
        "banks": {
            "neutral": NEUTRAL,
            "words": FAMILY_WORDS,
            "phrases": PHRASES,
            "emotion_words": EMOTION_WORDS,
            "emojis": EMOJIS,
        },
    }


def signal(family, trait, effect, channel, inverse=False):
    s = {"family": family, "trait": trait, "effect": effect, "channel": channel}
    if inverse:
        s["inverse"] = True
    return s


def recipe(target, source, rho, mt, st, ms, ss):
    """Linear recipe that gives corr(target, source) = rho with target marginal (mt, st)."""
    w = rho * st / ss
    return {"target": target, "source": source, "weight": round(w, 6),
            "offset": round(mt - w * ms, 6), "noise": round(st * (1.0 - rho * rho) ** 0.5, 6)}


REF = {
    "anxiety": (0.3467, 0.24), "avoidance": (0.4533, 0.2083), "openness": (0.775, 0.1925),
    "conscientiousness": (0.6725, 0.2225), "extraversion": (0.4125, 0.2725),
    "agreeableness": (0.7225, 0.21), "neuroticism": (0.3625, 0.265),
}


def default_spec():
    spec = base_spec(300, 2024)
    spec["banks"]["words"] = {k: v if k in ("pronouns", "conjunctions") else v[:6] for k, v in FAMILY_WORDS.items()}
    spec["banks"]["phrases"] = {k: v[:4] for k, v in PHRASES.items()}
    spec["rates"] = {"word": 0.7, "phrase": 0.7, "emotion": 0.6, "emoji": 0.25}
    spec["recipes"] = [
        recipe("neuroticism", "anxiety", 0.74, *REF["neuroticism"], *REF["anxiety"]),
        recipe("agreeableness", "avoidance", -0.53, *REF["agreeableness"], *REF["avoidance"]),
    ]
    spec["signals"] = [
        signal("emotion", "neuroticism", 0.8, "sadness"),
        signal("ngram", "anxiety", 0.8, "worry"),
        signal("pos", "avoidance", 0.7, "pronouns"),
        signal("pos", "openness", 0.7, "conjunctions"),
        signal("ngram", "openness", 0.8, "curiosity"),
        signal("tfidf", "conscientiousness", 0.8, "routine"),
        signal("tfidf", "agreeableness", 0.8, "kindness"),
        signal("tfidf", "extraversion", 0.8, "social"),
        signal("behavioral", "extraversion", 0.7, "followers"),
        signal("behavioral", "extraversion", 0.6, "mentions"),
    ]
    return spec


def strong_spec():
    spec = base_spec(500, 7)
    spec["tweets_per_user"] = [60, 80]
    spec["banks"]["phrases"] = {"worry": PHRASES["worry"][:2], "curiosity": PHRASES["curiosity"]}
    spec["recipes"] = [
        {"target": "neuroticism", "source": "anxiety", "weight": 0.9, "offset": 0.05, "noise": 0.15},
    ]
    spec["signals"] = [
        signal("ngram", "anxiety", 0.95, "worry"),
        signal("emotion", "neuroticism", 0.3, "sadness"),
        signal("pos", "avoidance", 0.95, "pronouns"),
        signal("pos", "openness", 0.95, "conjunctions"),
        signal("tfidf", "conscientiousness", 0.95, "routine"),
        signal("tfidf", "agreeableness", 0.95, "kindness"),
        signal("tfidf", "extraversion", 0.9, "social"),
        signal("behavioral", "extraversion", 0.9, "followers"),
        signal("behavioral", "conscientiousness", 0.9, "statuses"),
    ]
    spec["rates"] = {"word": 0.6, "phrase": 0.9, "emotion": 0.3, "emoji": 0.15}
    return spec


def write_lexicon(path):
    lines = ["# word<TAB>emotion<TAB>strength, word<TAB>pos<TAB>neg, synset<TAB>words"]
    for emotion, words in EMOTION_WORDS.items():
        for i, w in enumerate(words):
            lines.append(f"{w}\t{emotion}\t{0.9 - 0.05 * (i % 4):.2f}")
    lines += ["sad\tsadness\t0.7", "happy\tjoy\t0.7", "angry\tanger\t0.7"]
    for w, (p, n) in SENTIMENT.items():
        lines.append(f"{w}\t{p}\t{n}")
    for sid, words in SYNSETS.items():
        lines.append(f"{sid}\t{','.join(words)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_emoji_map(path):
    lines = ["# emoji<TAB>emotion"]
    for emotion, emojis in EMOJIS.items():
        lines += [f"{e}\t{emotion}" for e in emojis]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_emotion_corpus(path, rng):
    names = list(EMOTION_WORDS)
    lines = ["id\ttext\tlabels"]
    for i in range(240):
        k = rng.choice([1, 1, 2])
        chosen = sorted(rng.sample(range(6), k))
        words = [rng.choice(NEUTRAL) for _ in range(rng.randint(4, 8))]
        for e in chosen:
            words += rng.sample(EMOTION_WORDS[names[e]], 2)
            if rng.random() < 0.5:
                words.append(rng.choice(EMOJIS[names[e]]))
        rng.shuffle(words)
        flags = ",".join("1" if e in chosen else "0" for e in range(6))
        lines.append(f"e{i:04}\t{' '.join(words)}\t{flags}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


TAG_LEX = {
    "NOUN": NEUTRAL[:120], "VERB": "went saw made took said found gave told felt left".split(),
    "ADJ": "big small new old good bad long short happy quiet".split(),
    "ADV": "quickly slowly really often always never".split(),
    "PRON": "i me my you he she we they it".split(),
    "DET": "the a an this that every".split(),
    "ADP": "in on at of with from".split(),
    "CONJ": "and or but because".split(),
}


def write_tagged(path, rng):
    patterns = [
        ["PRON", "VERB", "DET", "NOUN"],
        ["DET", "ADJ", "NOUN", "VERB", "ADP", "DET", "NOUN"],
        ["PRON", "VERB", "ADP", "DET", "NOUN", "CONJ", "PRON", "VERB"],
        ["DET", "NOUN", "VERB", "ADV"],
        ["PRON", "ADV", "VERB", "DET", "ADJ", "NOUN"],
    ]
    sentences = []
    for _ in range(300):
        pat = rng.choice(patterns)
        sentences.append("\n".join(f"{rng.choice(TAG_LEX[t])}\t{t}" for t in pat))
    path.write_text("\n\n".join(sentences) + "\n", encoding="utf-8")


def write_key(path):
    rows = ["item_id,trait,reversed,scale_max"]
    for t, scale in [("anxiety", 7), ("avoidance", 7)]:
        for i in range(1, 5):
            rows.append(f"{t[:3]}{i},{t},{'true' if i == 4 else 'false'},{scale}")
    for t in ["openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"]:
        for i in range(1, 3):
            rows.append(f"{t[:3]}{i},{t},{'true' if i == 2 else 'false'},5")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(11)
    (OUT / "synth_default.json").write_text(json.dumps(default_spec(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    (OUT / "synth_strong.json").write_text(json.dumps(strong_spec(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    write_lexicon(OUT / "affect_lexicon.tsv")
    write_emoji_map(OUT / "emoji_map.tsv")
    write_emotion_corpus(OUT / "emotion_corpus.tsv", rng)
    write_tagged(OUT / "tagged_sample.tsv", rng)
    write_key(OUT / "questionnaire_key.csv")


if __name__ == "__main__":
    main()
