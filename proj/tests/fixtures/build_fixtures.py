"""Builds the JSONL fixtures from the tagged comments below."""
import json
import re
from pathlib import Path

HERE = Path(__file__).parent

COMMENTS = [
    ("r", "<emotional_fallacy>If we let them raise the parking fees again, next year nobody will be able to afford to drive downtown at all.</emotional_fallacy>"),
    ("r", "Honestly <credibility_fallacy>the guy who wrote that article drives a leased BMW, so why would anyone listen to him about budgets</credibility_fallacy>."),
    ("4", "<logical_fallacy>Everyone on this board already knows the update broke the game, so it must be true.</logical_fallacy> Stop defending it."),
    ("r", "I tried the new bakery on Fifth. The bread was good but the coffee was burnt and the line took twenty minutes."),
    ("r", "<emotional_fallacy>Think of the kids who will grow up without ever seeing a real forest</emotional_fallacy> if this bill passes."),
    ("4", "<credibility_fallacy>Imagine taking tax advice from a literal college dropout</credibility_fallacy>. Absolute clown thread."),
    ("r", "<logical_fallacy>My uncle smoked every day and lived to ninety, so smoking clearly is not that dangerous.</logical_fallacy>"),
    ("r", "Does anyone know whether the library renewal limit changed? Mine only let me renew twice this month."),
    ("4", "<emotional_fallacy>Every time <credibility_fallacy>a paid shill</credibility_fallacy> posts here the whole board gets dumber and angrier.</emotional_fallacy>"),
    ("r", "<logical_fallacy>Either we ban every car from the city center or we accept that the air will kill us all.</logical_fallacy>"),
    ("r", "The council meeting got moved to Thursday because the hall had a plumbing problem, according to the newsletter."),
    ("4", "<credibility_fallacy>He was wrong about the election once, so nothing he says about the economy can be trusted</credibility_fallacy>."),
    ("r", "<emotional_fallacy>You should be ashamed to even ask that question while people are suffering.</emotional_fallacy>"),
    ("r", "<logical_fallacy>Crime went up the same year they painted the bike lanes, so the bike lanes caused it.</logical_fallacy>"),
    ("4", "I have been running the same graphics card for six years and it still handles most games at medium settings."),
    ("r", "<credibility_fallacy>A famous actor said the vaccine schedule is too aggressive, and he has millions of fans</credibility_fallacy>, so maybe rethink it."),
    ("r", "<emotional_fallacy>If you really cared about your family you would buy the premium insurance plan today.</emotional_fallacy>"),
    ("4", "<logical_fallacy>Nobody has proven that the moon base does not exist, therefore it exists.</logical_fallacy>"),
    ("r", "Our team finally shipped the migration last night. Only two rollbacks and one very long coffee break."),
    ("r", "<emotional_fallacy>Real fans would never complain about ticket prices, <credibility_fallacy>only fake fans like you</credibility_fallacy> do.</emotional_fallacy>"),
    ("4", "<logical_fallacy>If we allow one food truck near the park, soon the whole park will be a parking lot.</logical_fallacy>"),
    ("r", "<credibility_fallacy>Of course the professor supports the tuition increase, she gets paid by the university</credibility_fallacy>."),
    ("r", "The hiking trail near the lake is closed until May because of erosion, so plan another route this weekend."),
    ("4", "<emotional_fallacy>Anyone who disagrees with this take clearly hates freedom and wants the country to fail.</emotional_fallacy>"),
    ("r", "<logical_fallacy>Millions of people buy lottery tickets every week, so buying them must be a smart investment.</logical_fallacy>"),
    ("r", "<credibility_fallacy>You are not even from this town</credibility_fallacy>, so your opinion about the school board does not count."),
    ("4", "<logical_fallacy>The old version never crashed on my machine, so the new crash reports are all fake.</logical_fallacy> Cope."),
    ("r", "<emotional_fallacy>How can you sleep at night knowing that your vote helped close the clinic?</emotional_fallacy>"),
    ("r", "Recipe tip: toast the spices in a dry pan first and the curry tastes a lot deeper. Learned that from a neighbor."),
    ("4", "<emotional_fallacy>Every single day <credibility_fallacy>these bootlickers</credibility_fallacy> defend the landlords while rents explode.</emotional_fallacy>"),
    ("r", "The bus schedule changes next month. Route twelve will run every fifteen minutes instead of every half hour."),
    ("r", "<logical_fallacy>We have always closed the pool in September, so changing it now would be wrong.</logical_fallacy>"),
    ("4", "Anyone else notice the servers lag more on weekends? Probably just more players online at the same time."),
    ("r", "<credibility_fallacy>That study came from a university in another country, so it obviously does not apply here</credibility_fallacy>."),
    ("r", "<emotional_fallacy>Do it for your grandmother, who fought so hard so you could have these rights.</emotional_fallacy>"),
    ("4", "Finished the long campaign yesterday. The ending felt rushed but the soundtrack was excellent the whole way."),
    ("r", "<logical_fallacy>The mayor jogs every morning, so the city budget must be in good shape.</logical_fallacy>"),
    ("r", "My cat refuses to eat anything except one brand of dry food, and of course that brand is always sold out."),
    ("4", "<credibility_fallacy>Typical answer from someone who still lives with their parents</credibility_fallacy>, try again."),
    ("r", "<emotional_fallacy>Imagine the terror those families feel every night</emotional_fallacy>, and you still want to cut the funding?"),
    ("r", "The farmers market opens at eight on Saturdays and the good tomatoes are usually gone by nine thirty."),
    ("4", "<logical_fallacy>Sales of ice cream and shark attacks both rise in summer, so ice cream attracts sharks.</logical_fallacy>"),
    ("r", "Can someone recommend a decent budget keyboard? My old one lost three keys after the coffee incident."),
    ("r", "<credibility_fallacy>The inspector is a known drunk</credibility_fallacy>, so the bridge report is worthless."),
    ("4", "<emotional_fallacy>If you cared even a little about this community you would stop posting this garbage.</emotional_fallacy>"),
    ("r", "Traffic on the ring road was terrible this morning because two lanes were closed for resurfacing work."),
    ("r", "<logical_fallacy>Since the new manager arrived the coffee machine broke, so the new manager is bad luck.</logical_fallacy>"),
    ("4", "The patch notes mention a fix for the inventory bug but nothing about the audio crackling on startup."),
    ("r", "<emotional_fallacy>Shame on everyone who stayed silent while <credibility_fallacy>those corrupt officials</credibility_fallacy> sold the park.</emotional_fallacy>"),
    ("r", "Weather looks clear for the weekend, so the community cleanup at the river is still on for Sunday morning."),
]

TAG = re.compile(r"<(/?)(credibility|logical|emotional)_fallacy>")


def parse(tagged):
    text, spans, stack = [], [], []
    pos = 0
    for m in TAG.finditer(tagged):
        text.append(tagged[pos:m.start()])
        pos = m.end()
        offset = len("".join(text))
        if m.group(1):
            label, start = stack.pop()
            assert label == m.group(2)
            spans.append({"start": start, "end": offset, "label": label + "_fallacy", "tier2": None})
        else:
            stack.append((m.group(2), offset))
    text.append(tagged[pos:])
    assert not stack
    spans.sort(key=lambda s: (s["start"], -s["end"], s["label"]))
    return "".join(text), spans


def record(sid, src, text, spans, annotator=""):
    return {"sample_id": sid, "annotator_id": annotator, "source": "reddit" if src == "r" else "fourchan",
            "text": text, "spans": spans, "meta": {}}


def dump(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


# Samples whose third annotator relabels the outermost span.
DISAGREE = {2, 9, 13, 20, 25, 33}
RELABEL = {"credibility_fallacy": "logical_fallacy", "logical_fallacy": "emotional_fallacy",
           "emotional_fallacy": "credibility_fallacy"}


def main():
    parsed = [(f"c{i:02d}", src, *parse(t)) for i, (src, t) in enumerate(COMMENTS)]
    dump(HERE / "corpus" / "comments50.jsonl", [record(sid, src, text, []) for sid, src, text, _ in parsed])
    rows = []
    for i, (sid, src, text, spans) in enumerate(parsed[:36]):
        for ann in ("a1", "a2", "a3"):
            own = [dict(s) for s in spans]
            if ann == "a3" and i in DISAGREE:
                own[0]["label"] = RELABEL[own[0]["label"]]
                own.sort(key=lambda s: (s["start"], -s["end"], s["label"]))
            rows.append(record(sid, src, text, own, ann))
    dump(HERE / "pipeline" / "annotations.jsonl", rows)


if __name__ == "__main__":
    main()
