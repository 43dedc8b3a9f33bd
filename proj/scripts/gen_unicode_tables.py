#!/usr/bin/env python3
"""Regenerates src/unicode_tables.inc from Python's unicodedata.

Letter ranges cover general categories L* and M* (combining marks stay
glued to the letters they modify). Digit ranges cover Nd.
"""
import sys
import unicodedata


def ranges(pred):
    out = []
    start = None
    for cp in range(0x110000):
        ok = pred(cp)
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def cat(cp):
    return unicodedata.category(chr(cp))


def emit(name, rs, f):
    f.write(f"inline constexpr CodeRange {name}[] = {{\n")
    for a, b in rs:
        f.write(f"    {{0x{a:X}, 0x{b:X}}},\n")
    f.write("};\n\n")


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else "src/unicode_tables.inc"
    letters = ranges(lambda cp: cat(cp)[0] in "LM")
    digits = ranges(lambda cp: cat(cp) == "Nd")
    with open(path, "w", encoding="utf-8") as f:
        f.write("// Generated by scripts/gen_unicode_tables.py "
                f"(Unicode {unicodedata.unidata_version}). Do not edit.\n\n")
        emit("kLetterRanges", letters, f)
        emit("kDigitRanges", digits, f)


if __name__ == "__main__":
    main()
