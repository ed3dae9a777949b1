#!/usr/bin/env python3
"""Regenerates include/germeval/unicode_data.hpp from Python's unicodedata.

The header carries three tables used by the NFC normalizer:
  * full canonical (NFD) decompositions, Hangul excluded (algorithmic),
  * nonzero canonical combining classes,
  * primary composition pairs (composition exclusions filtered out).

Usage: python3 tools/gen_unicode_tables.py > include/germeval/unicode_data.hpp
"""

import sys
import unicodedata

HANGUL_S_BASE = 0xAC00
HANGUL_S_COUNT = 11172


def is_hangul_syllable(cp: int) -> bool:
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def main() -> None:
    decomps = []  # (cp, [expansion...]) full canonical decomposition
    cccs = []  # (cp, ccc) for ccc != 0
    pairs = []  # (first, second, composite)

    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        ch = chr(cp)

        ccc = unicodedata.combining(ch)
        if ccc != 0:
            cccs.append((cp, ccc))

        if is_hangul_syllable(cp):
            continue

        nfd = unicodedata.normalize("NFD", ch)
        if nfd != ch:
            decomps.append((cp, [ord(c) for c in nfd]))

        raw = unicodedata.decomposition(ch)
        if raw and not raw.startswith("<"):
            parts = [int(p, 16) for p in raw.split()]
            if len(parts) == 2 and unicodedata.combining(chr(parts[0])) == 0:
                # A pair is a primary composite iff NFC re-composes it.
                if unicodedata.normalize("NFC", nfd) == ch:
                    pairs.append((parts[0], parts[1], cp))

    pairs.sort(key=lambda t: (t[0] << 32) | t[1])

    out = sys.stdout
    out.write("// Generated by tools/gen_unicode_tables.py -- do not edit.\n")
    out.write(f"// Unicode version: {unicodedata.unidata_version}\n")
    out.write("#pragma once\n\n#include <cstdint>\n\n")
    out.write("namespace germeval::unicode_data {\n\n")
    out.write(f"inline constexpr char kUnicodeVersion[] = \"{unicodedata.unidata_version}\";\n\n")

    exp_offsets = []
    expansion_pool = []
    for cp, exp in decomps:
        exp_offsets.append((cp, len(expansion_pool), len(exp)))
        expansion_pool.extend(exp)

    out.write("struct Decomposition { char32_t cp; std::uint32_t offset; std::uint32_t length; };\n\n")
    out.write(f"inline constexpr char32_t kDecompositionPool[{len(expansion_pool)}] = {{\n")
    for i in range(0, len(expansion_pool), 12):
        row = ", ".join(f"0x{v:04X}" for v in expansion_pool[i : i + 12])
        out.write(f"    {row},\n")
    out.write("};\n\n")

    out.write(f"inline constexpr Decomposition kDecompositions[{len(exp_offsets)}] = {{\n")
    for cp, off, ln in exp_offsets:
        out.write(f"    {{0x{cp:04X}, {off}, {ln}}},\n")
    out.write("};\n\n")

    out.write("struct CombiningClass { char32_t cp; std::uint8_t ccc; };\n\n")
    out.write(f"inline constexpr CombiningClass kCombiningClasses[{len(cccs)}] = {{\n")
    for cp, ccc in cccs:
        out.write(f"    {{0x{cp:04X}, {ccc}}},\n")
    out.write("};\n\n")

    out.write("// Key is (first << 32) | second; value is the primary composite.\n")
    out.write("struct CompositionPair { std::uint64_t key; char32_t composite; };\n\n")
    out.write(f"inline constexpr CompositionPair kCompositionPairs[{len(pairs)}] = {{\n")
    for a, b, c in pairs:
        key = (a << 32) | b
        out.write(f"    {{0x{key:012X}ull, 0x{c:04X}}},\n")
    out.write("};\n\n")

    out.write("}  // namespace germeval::unicode_data\n")


if __name__ == "__main__":
    main()
