"""Coarse part-of-speech tagging collapsed to four classes.

A small rule tagger: closed-class (function) words map to OTHER, everything
else is classified by suffix with a short lexicon of frequent adjectives
and verbs; the open-class default is NOUN. Crude, but the engine only needs
the noun/verb/adjective-vs-other split for its content-word masking.
"""

from __future__ import annotations

from .formats import POS_ADJECTIVE, POS_NOUN, POS_OTHER, POS_VERB

FUNCTION_WORDS = frozenset("""
a an the this that these those some any each every no such
i you he she it we they me him her us them my your his its our their
mine yours hers ours theirs myself yourself himself herself itself
ourselves themselves who whom whose which what where when why how
and or but nor so yet if then else because although though while since
unless until whether as than of in on at by for with about against
between into through during before after above below to from up down
out off over under again further once here there all both few more
most other only own same too very just not never also
am is are was were be been being do does did doing have has had having
will would shall should may might must can could
""".split())

COMMON_ADJECTIVES = frozenset("""
good bad great small big large new old high low long short right wrong
hot cold warm cool nice fine best worst better worse happy sad easy hard
early late young strong weak rich poor clean dirty fresh dry wet full
empty cheap dear fast slow dark light deep flat free busy quiet loud
tasty delicious friendly awful horrible amazing lovely pretty ugly
""".split())

COMMON_VERBS = frozenset("""
go goes went gone get gets got gotten make makes made take takes took
taken come comes came see sees saw seen know knows knew known think
thinks thought say says said tell tells told find finds found give gives
gave given use uses used work works worked call calls called try tries
tried ask asks asked need needs needed feel feels felt become becomes
became leave leaves left put puts keep keeps kept let lets begin begins
began seem seems seemed help helps helped show shows showed hear hears
heard play plays played run runs ran move moves moved like likes liked
live lives lived believe believes believed bring brings brought write
writes wrote written eat eats ate eaten drink drinks drank recommend
recommends recommended love loves loved hate hates hated want wants
wanted
""".split())

_ADJECTIVE_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "less", "ish",
                       "ic", "ical", "ary", "al")
_VERB_SUFFIXES = ("ize", "ise", "ify", "ing", "ed")
_NOUN_SUFFIXES = ("tion", "sion", "ment", "ness", "ity", "ship", "hood",
                  "ism", "ance", "ence", "er", "or", "ist")


def coarse_pos(word: str) -> int:
    """Map a (lowercased) word to one of the four coarse classes."""
    w = word.lower()
    if w in FUNCTION_WORDS:
        return POS_OTHER
    if w in COMMON_ADJECTIVES:
        return POS_ADJECTIVE
    if w in COMMON_VERBS:
        return POS_VERB
    if len(w) > 4:
        for suffix in _ADJECTIVE_SUFFIXES:
            if w.endswith(suffix):
                return POS_ADJECTIVE
        for suffix in _VERB_SUFFIXES:
            if w.endswith(suffix):
                return POS_VERB
        for suffix in _NOUN_SUFFIXES:
            if w.endswith(suffix):
                return POS_NOUN
    return POS_NOUN
