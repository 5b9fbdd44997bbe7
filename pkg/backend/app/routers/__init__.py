from . import encode, decode, metrics, probe, bench

SUBCOMMANDS = [encode, decode, metrics, probe, bench]

__all__ = ["encode", "decode", "metrics", "probe", "bench", "SUBCOMMANDS"]
