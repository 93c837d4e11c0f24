#!/usr/bin/env python3
"""Generate the bundled synthetic treebank and phrase list.

Idiom-like phrases: the two words mostly occur together, and their in-phrase
sentences draw subjects and prepositional objects from a topic pool that the
words' other uses only rarely see.  Ordinary phrases: both words combine freely
with several partners and every use shares one general context pool.

    python3 data/generate_minicorpus.py --out-dir data
"""

import argparse
import random
from pathlib import Path

SEED = 20240607

# id, type, head, dep[, topic subject noun, topic object noun].
# VO: head verb, dep noun.  AN: head noun, dep adjective.  NN: dep noun then
# head noun.  B: head conjunct, "and", dep conjunct.
IDIOMS = [
    ("cut_corners", "VO", "cut", "corners", "contractor", "budget"),
    ("pull_strings", "VO", "pull", "strings", "senator", "committee"),
    ("spill_beans", "VO", "spill", "beans", "reporter", "scandal"),
    ("burn_bridges", "VO", "burn", "bridges", "rival", "employer"),
    ("red_tape", "AN", "tape", "red", "clerk", "ministry"),
    ("cold_feet", "AN", "feet", "cold", "groom", "wedding"),
    ("elbow_grease", "NN", "grease", "elbow", "janitor", "chores"),
    ("rat_race", "NN", "race", "rat", "commuter", "career"),
    ("wear_and_tear", "B", "wear", "tear", "mechanic", "warranty"),
    ("odds_and_ends", "B", "odds", "ends", "collector", "attic"),
]

ORDINARY = [
    ("eat_bread", "VO", "eat", "bread"),
    ("read_books", "VO", "read", "books"),
    ("wash_cars", "VO", "wash", "cars"),
    ("big_garden", "AN", "garden", "big"),
    ("old_chair", "AN", "chair", "old"),
    ("kitchen_table", "NN", "table", "kitchen"),
    ("office_desk", "NN", "desk", "office"),
    ("pay_bills", "VO", "pay", "bills"),
]

# Shared pools.  Every matched instance takes its varied word from these, so
# the varied word also combines with many other partners.
GENERAL_VERBS = ["see", "find", "want", "need", "get", "carry"]
GENERAL_NOUNS = ["box", "bag", "letter", "picture", "ticket", "basket", "blanket", "bottle"]
GENERAL_ADJECTIVES = ["nice", "new", "good", "plain", "large", "simple"]
PRONOUNS = ["she", "he", "they"]
GENERAL_SUBJECTS = ["neighbour", "teacher", "student"]
GENERAL_PREPS = ["at", "in", "after"]
GENERAL_PLACES = ["home", "morning", "weekend", "noon"]
FRAME_VERBS = ["mentioned", "noticed", "described"]
FILLER_VERBS = ["walked", "slept", "waited"]
ADVERBS = ["carefully", "quickly", "slowly"]
STATES = ["fine", "ready", "plain"]

# Counts per phrase: target, head-matched, dep-matched, lone head, lone dep,
# partner nearby, and matched sentences that borrow the topic context.
IDIOM_COUNTS = (36, 16, 16, 12, 12, 3, 2)
ORDINARY_COUNTS = {
    "VO": (36, 160, 160, 12, 12, 32, 0),
    # Noun-phrase-internal slots see fewer competing fillers, so these words
    # need more partners to read as freely combining.
    "AN": (36, 160, 160, 12, 12, 16, 0),
    "NN": (36, 320, 320, 12, 12, 64, 0),
}
FILLERS_VO = 200
FILLERS_FRAMED = 150
FILLERS_COMPOUND = 400
FILLERS_PLAIN = 100


def node(label, *kids):
    return "(" + label + " " + " ".join(kids) + ")"


def leaf(pos, word):
    return "(" + pos + " " + word + ")"


class Generator:
    def __init__(self, seed):
        self.rng = random.Random(seed)

    def pick(self, xs):
        return self.rng.choice(xs)

    def subject(self, topic=None):
        if topic is not None:
            return node("NP", leaf("DT", "the"), leaf("NN", topic[0]))
        if self.rng.random() < 0.5:
            return node("NP", leaf("PRP", self.pick(PRONOUNS)))
        return node("NP", leaf("DT", "the"), leaf("NN", self.pick(GENERAL_SUBJECTS)))

    def tail(self, topic=None):
        prep = leaf("IN", self.pick(GENERAL_PREPS))
        if topic is not None:
            return node("PP", prep, node("NP", leaf("DT", "the"), leaf("NN", topic[1])))
        return node("PP", prep, node("NP", leaf("NN", self.pick(GENERAL_PLACES))))

    def sentence(self, subj, vp):
        return node("S", subj, vp, leaf(".", "."))

    # Phrase-bearing sentences ------------------------------------------------

    def vo(self, verb, noun, topic):
        vp = node("VP", leaf("MD", "will"),
                  node("VP", leaf("VB", verb), node("NP", leaf("NN", noun)), self.tail(topic)))
        return self.sentence(self.subject(topic), vp)

    def framed(self, np_kids, topic):
        vp = node("VP", leaf("VBD", self.pick(FRAME_VERBS)),
                  node("NP", leaf("DT", "the"), *np_kids), self.tail(topic))
        return self.sentence(self.subject(topic), vp)

    def phrase(self, ptype, head, dep, topic):
        if ptype == "VO":
            return self.vo(head, dep, topic)
        if ptype == "AN":
            return self.framed([leaf("JJ", dep), leaf("NN", head)], topic)
        if ptype == "NN":
            return self.framed([leaf("NN", dep), leaf("NN", head)], topic)
        return self.framed([leaf("NN", head), leaf("CC", "and"), leaf("NN", dep)], topic)

    def alternatives(self, ptype, fixed):
        """Pool for the varied slot when `fixed` ("head" or "dep") is kept."""
        if ptype == "VO":
            return GENERAL_NOUNS if fixed == "head" else GENERAL_VERBS
        if ptype == "AN" and fixed == "head":
            return GENERAL_ADJECTIVES
        return GENERAL_NOUNS

    # Uses of one word outside any phrase structure ---------------------------

    def lone_verb(self, verb):
        vp = node("VP", leaf("MD", "will"),
                  node("VP", leaf("VB", verb), node("ADVP", leaf("RB", self.pick(ADVERBS))),
                       self.tail()))
        return self.sentence(self.subject(), vp)

    def lone_noun(self, noun):
        subj = node("NP", leaf("DT", "the"), leaf("NN", noun))
        vp = node("VP", leaf("VBD", "seemed"), node("ADJP", leaf("JJ", self.pick(STATES))),
                  self.tail())
        return self.sentence(subj, vp)

    def lone_adjective(self, adj):
        subj = node("NP", leaf("DT", "the"), leaf("NN", self.pick(GENERAL_SUBJECTS)))
        vp = node("VP", leaf("VBD", "looked"), node("ADJP", leaf("JJ", adj)), self.tail())
        return self.sentence(subj, vp)

    def lone(self, ptype, slot, word):
        if ptype == "VO" and slot == "head":
            return self.lone_verb(word)
        if ptype == "AN" and slot == "dep":
            return self.lone_adjective(word)
        return self.lone_noun(word)

    def partner(self, ptype, head, dep):
        """Both words close together but outside the query's structure."""
        if ptype == "VO":
            rel = node("SBAR", node("S", node("NP", leaf("PRP", self.pick(PRONOUNS))),
                                    node("VP", leaf("MD", "will"), node("VP", leaf("VB", head)))))
            return node("FRAG", node("NP", node("NP", leaf("DT", "the"), leaf("NN", dep)), rel),
                        leaf(".", "."))
        if ptype == "AN":
            return self.sentence(node("NP", leaf("DT", "the"), leaf("NN", head)),
                                 node("VP", leaf("VBD", "was"), node("ADJP", leaf("JJ", dep))))
        if ptype == "NN":
            return node("FRAG", node("NP", leaf("NN", head)),
                        node("PP", leaf("IN", "near"), node("NP", leaf("NN", dep))), leaf(".", "."))
        return node("FRAG", node("NP", leaf("NN", dep), leaf("CC", "but"), leaf("NN", head)),
                    leaf(".", "."))

    def fillers(self):
        out = []
        for _ in range(FILLERS_VO):
            out.append(self.vo(self.pick(GENERAL_VERBS), self.pick(GENERAL_NOUNS), None))
        for _ in range(FILLERS_FRAMED):
            out.append(self.framed([leaf("JJ", self.pick(GENERAL_ADJECTIVES)),
                                    leaf("NN", self.pick(GENERAL_NOUNS))], None))
        for _ in range(FILLERS_COMPOUND):
            out.append(self.framed([leaf("NN", self.pick(GENERAL_NOUNS)),
                                    leaf("NN", self.pick(GENERAL_NOUNS))], None))
        for _ in range(FILLERS_PLAIN):
            vp = node("VP", leaf("VBD", self.pick(FILLER_VERBS)), self.tail())
            out.append(self.sentence(self.subject(), vp))
        return out

    # -------------------------------------------------------------------------

    def phrase_sentences(self, entry, counts):
        ptype, head, dep = entry[1:4]
        topic = entry[4:6] if len(entry) > 4 else None
        n_target, n_head, n_dep, n_lone_head, n_lone_dep, n_partner, n_leak = counts
        out = []
        for _ in range(n_target):
            out.append(self.phrase(ptype, head, dep, topic))
        pool = self.alternatives(ptype, "head")
        for i in range(n_head):
            out.append(self.phrase(ptype, head, pool[i % len(pool)], topic if i < n_leak else None))
        pool = self.alternatives(ptype, "dep")
        for i in range(n_dep):
            out.append(self.phrase(ptype, pool[i % len(pool)], dep, topic if i < n_leak else None))
        out += [self.lone(ptype, "head", head) for _ in range(n_lone_head)]
        out += [self.lone(ptype, "dep", dep) for _ in range(n_lone_dep)]
        out += [self.partner(ptype, head, dep) for _ in range(n_partner)]
        return out

    def corpus(self):
        sentences = []
        for entry in IDIOMS:
            sentences += self.phrase_sentences(entry, IDIOM_COUNTS)
        for entry in ORDINARY:
            sentences += self.phrase_sentences(entry, ORDINARY_COUNTS[entry[1]])
        sentences += self.fillers()
        self.rng.shuffle(sentences)
        docs = []
        i = 0
        while i < len(sentences):
            size = self.rng.randint(4, 6)
            docs.append(sentences[i:i + size])
            i += size
        return docs


def write_trees(path, docs):
    with open(path, "w") as f:
        f.write("# Synthetic treebank for the end-to-end check.\n")
        f.write("# Generated by generate_minicorpus.py (seed %d); do not edit by hand.\n" % SEED)
        for k, doc in enumerate(docs):
            f.write("#doc d%04d\n" % k)
            for s in doc:
                f.write(s + "\n")


def write_phrases(path):
    with open(path, "w") as f:
        f.write("phrase_id\tphrase_type\thead_lemma\tdep_lemma\n")
        for entry in IDIOMS + ORDINARY:
            f.write("%s\t%s\t%s\t%s\n" % entry[:4])


def write_kinds(path):
    with open(path, "w") as f:
        f.write("phrase_id\tkind\n")
        for entry in IDIOMS:
            f.write("%s\tidiom\n" % entry[0])
        for entry in ORDINARY:
            f.write("%s\tordinary\n" % entry[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default=str(Path(__file__).resolve().parent))
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trees(out / "minicorpus.trees", Generator(SEED).corpus())
    write_phrases(out / "phrases.tsv")
    write_kinds(out / "phrase_kinds.tsv")


if __name__ == "__main__":
    main()
