#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Generate src/unicode_tables.inc: alphanumeric ranges and simple case folding."""
import sys
import unicodedata

MAX_CP = 0x10FFFF


def is_alnum(cp):
    c = chr(cp)
    return unicodedata.category(c)[0] in ("L", "N")


def simple_fold(cp):
    c = chr(cp)
    folded = c.casefold()
    if len(folded) == 1:
        return ord(folded)
    lower = c.lower()
    if len(lower) == 1:
        return ord(lower)
    return cp


def main(out_path):
    ranges = []
    start = None
    for cp in range(MAX_CP + 2):
        ok = cp <= MAX_CP and not (0xD800 <= cp <= 0xDFFF) and is_alnum(cp)
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            ranges.append((start, cp - 1))
            start = None
    folds = [(cp, simple_fold(cp)) for cp in range(MAX_CP + 1)
             if not (0xD800 <= cp <= 0xDFFF) and simple_fold(cp) != cp]
    with open(out_path, "w", encoding="utf-8") as f:
        f.write("// Generated by tools/gen_unicode_tables.py from Unicode %s. Do not edit.\n"
                % unicodedata.unidata_version)
        f.write("// clang-format off\n")
        f.write("inline constexpr CodepointRange kAlnumRanges[] = {\n")
        for lo, hi in ranges:
            f.write("    {0x%04X, 0x%04X},\n" % (lo, hi))
        f.write("};\n\n")
        f.write("inline constexpr CaseFold kSimpleFolds[] = {\n")
        for src, dst in folds:
            f.write("    {0x%04X, 0x%04X},\n" % (src, dst))
        f.write("};\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/unicode_tables.inc")
