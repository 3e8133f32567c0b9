#!/usr/bin/env python3
"""Regenerates data/lexicon.tsv and data/tagged_corpus.txt.

Pronunciations come from the CMU Pronouncing Dictionary (`pip install cmudict`),
mapped onto the project phone set and syllabified by maximal onset. Part-of-speech
tags are hand-assigned below. The tagged corpus is produced from a small template
grammar over the same vocabulary with a fixed seed.
"""
import random
import sys
from pathlib import Path

import cmudict

NOUNS = """
time year people way day man thing woman life child world school state family
student group country problem hand part place case week company system program
question work government number night point home water room mother area money
story fact month lot right study book eye job word business issue side kind head
house service friend father power hour game line end member law car city name
president team minute idea kid body information back parent face others level
office door health person art war history party result change morning reason
research girl guy moment air teacher force education foot boy age policy music
market sense nation plan college interest death experience effect class control
care field development role effort rate heart drug show leader light voice wife
police mind price report decision son view relationship town road arm difference
value building action model season society tax director position player record
paper space ground form event official matter center couple site project activity
star table need court oil situation cost industry figure street image phone data
picture practice piece land product doctor wall patient worker news test movie
north love support technology step baby computer type attention film tree source
organization hair window evidence population truth song wire box fox cab cat dog
bird fish horse sun moon rain snow river lake sea ship boat train bus bridge
garden flower apple bread milk coffee tea cake dinner lunch breakfast kitchen
bed chair floor roof letter pen desk map clock shoe hat coat shirt dress
""".split()

VERBS = """
be have do say go get make know think take see come want look use find give tell
work call try ask need feel become leave put mean keep let begin seem help talk
turn start show hear play run move like live believe hold bring happen write
provide sit stand lose pay meet include continue set learn lead understand watch
follow stop create speak read allow add spend grow open walk win offer remember
consider appear buy wait serve die send expect build stay fall cut reach kill
remain suggest raise pass sell require decide return explain hope develop carry
break receive agree pull eat sing dance jump swim drive fly climb cook clean wash
paint draw laugh cry smile sleep wake listen fix teach shout throw catch kick
""".split()

ADJECTIVES = """
other new good high old great big american small large national young different
black long little important political bad white real best right social only public
sure low early able human local late hard major better economic strong possible
whole free military true federal international full special easy clear recent
certain personal open red difficult available likely short single medical current
wrong private past foreign fine common poor natural significant similar hot dead
central happy serious ready simple left physical general environmental financial
blue democratic dark various entire close legal religious cold final main green
nice huge popular traditional cultural quick slow quiet loud soft warm bright
""".split()

ADVERBS = """
up so out just now how then also here well only very even back there down still
in as too when never really most on why about over again far away once often
always sometimes usually later soon today together almost already quickly slowly
""".split()

DETERMINERS = "the a an this that these those every each some no any".split()
PRONOUNS = "i you he she it we they me him her us them".split()
PREPOSITIONS = "of to in for on with at by from into about over after under near".split()
CONJUNCTIONS = "and or but because".split()
MODALS = "can will would could should may might must".split()
NUMBERS = """
zero one two three four five six seven eight nine ten eleven twelve thirteen
fourteen fifteen sixteen seventeen eighteen nineteen twenty thirty forty fifty
sixty seventy eighty ninety hundred thousand million
""".split()

# (word, tag) -> which CMU variant (0-based) to use. Non-homophonous homographs
# get one row per distinct pronunciation.
HOMOGRAPHS = {
    ("live", "VB"): 1, ("live", "JJ"): 0,
    ("close", "JJ"): 0, ("close", "VB"): 1,
    ("use", "NN"): 0, ("use", "VB"): 1,
    ("record", "NN"): 1, ("record", "VB"): 2,
    ("lead", "NN"): 0, ("lead", "VB"): 1,
    ("wind", "NN"): 1, ("wind", "VB"): 0,
    ("present", "JJ"): 0, ("present", "VB"): 1,
    ("object", "NN"): 0, ("object", "VB"): 1,
}

VOWELS = {"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW",
          "OY", "UH", "UW"}

ONSETS = {(c,) for c in "p b t d k g f v th dh s z sh zh hh ch jh m n l r w y".split()}
ONSETS |= {tuple(o.split()) for o in """
p l|p r|p y|b l|b r|b y|t r|t w|d r|d w|k l|k r|k w|k y|g l|g r|g w|f l|f r|f y
th r|th w|sh r|s p|s t|s k|s m|s n|s l|s w|s f|m y|n y|v y|hh y|hh w
s p l|s p r|s t r|s k r|s k w|s k l|s p y|s t y|s k y
""".replace("\n", "|").split("|") if o.strip()}


def to_phone(cmu):
    base = cmu.rstrip("012")
    stress = cmu[len(base):]
    if base == "AH" and stress == "0":
        return "ax", 0
    return base.lower(), (int(stress) if stress else None)


def syllabify(cmu_phones):
    phones = [to_phone(p) for p in cmu_phones]
    nuclei = [i for i, (_, s) in enumerate(phones) if s is not None]
    if not nuclei:
        raise ValueError("no vowel")
    # boundary[k] = index where syllable k+1 starts
    starts = [0]
    for a, b in zip(nuclei, nuclei[1:]):
        cluster = [p for p, _ in phones[a + 1:b]]
        split = len(cluster)
        for j in range(len(cluster) + 1):
            if j == len(cluster) or tuple(cluster[j:]) in ONSETS:
                split = j
                break
        starts.append(a + 1 + split)
    sylls = []
    for k, s in enumerate(starts):
        e = starts[k + 1] if k + 1 < len(starts) else len(phones)
        sylls.append("-".join(p + (str(st) if st is not None else "")
                              for p, st in phones[s:e]))
    return ".".join(sylls)


def main(out_dir):
    d = cmudict.dict()
    rows = {}
    order = []

    def add(word, tag):
        if word not in d:
            print("missing from dictionary:", word, file=sys.stderr)
            return
        idx = HOMOGRAPHS.get((word, tag), 0)
        pron = syllabify(d[word][idx])
        key = (word, tag)
        if key in rows:
            return
        rows[key] = pron
        order.append(key)

    for tag, words in (("NN", NOUNS), ("VB", VERBS), ("JJ", ADJECTIVES),
                       ("RB", ADVERBS), ("DT", DETERMINERS), ("PRP", PRONOUNS),
                       ("IN", PREPOSITIONS), ("CC", CONJUNCTIONS), ("MD", MODALS),
                       ("CD", NUMBERS)):
        for w in words:
            add(w, tag)
    for (w, tag) in HOMOGRAPHS:
        add(w, tag)

    # merge rows of one word that share a pronunciation
    merged = {}
    for w, tag in order:
        merged.setdefault(w, {})
        merged[w].setdefault(rows[(w, tag)], []).append(tag)
    with open(Path(out_dir) / "lexicon.tsv", "w") as f:
        f.write("# orthography\tPOS[,POS...]\tsyllabified pronunciation\n")
        for w in sorted(merged):
            for pron, tags in merged[w].items():
                f.write(f"{w}\t{','.join(tags)}\t{pron}\n")

    rng = random.Random(1998)
    vocab = {t: [w for (w, tt) in order if tt == t] for t in
             ("NN", "VB", "JJ", "RB", "DT", "PRP", "IN", "CC", "MD", "CD")}
    templates = [
        "DT JJ NN VB DT NN .", "PRP VB IN DT NN .", "DT NN VB RB .",
        "PRP MD VB DT JJ NN .", "DT NN IN DT NN VB JJ .",
        "PRP VB DT NN CC PRP VB RB .", "CD NN VB IN DT JJ NN .",
        "DT JJ NN , DT NN VB .", "PRP RB VB DT NN IN PRP .",
        "DT NN MD VB RB .", "PRP VB JJ NN .", "DT JJ JJ NN VB PRP .",
    ]
    fixed = [
        "they/PRP live/VB in/IN the/DT city/NN ./.",
        "we/PRP live/VB here/RB ./.",
        "a/DT live/JJ wire/NN can/MD kill/VB ./.",
        "the/DT live/JJ show/NN was/VB good/JJ ./.",
        "please/VB close/VB the/DT door/NN ./.",
        "the/DT store/NN is/VB close/JJ ./.",
        "they/PRP use/VB the/DT car/NN ./.",
        "the/DT use/NN of/IN power/NN ./.",
    ]
    with open(Path(out_dir) / "tagged_corpus.txt", "w") as f:
        f.write("# token/TAG pairs, one sentence per line\n")
        for s in fixed:
            f.write(s + "\n")
        for _ in range(600):
            t = rng.choice(templates)
            toks = []
            for tag in t.split():
                if tag in (".", ","):
                    toks.append(f"{tag}/{tag}")
                else:
                    toks.append(f"{rng.choice(vocab[tag])}/{tag}")
            f.write(" ".join(toks) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data")
