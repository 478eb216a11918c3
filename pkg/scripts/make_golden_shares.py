"""Regenerate the checked-in .dgsh golden fixtures under tests/fixtures/golden/.

Only rerun this on a deliberate format change; the tests compare the
files against independently packed headers.
"""

from pathlib import Path

from datagrid import erasure_coding, fragmentation, secret_sharing
from datagrid.share import ShareParams
from datagrid.shareformat import save_share

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    save_share(OUT / "shamir_k1n1.dgsh", secret_sharing.split(b"golden", ShareParams(1, 1), 0)[0])
    save_share(OUT / "shamir_k2n3_i2.dgsh", secret_sharing.split(b"golden", ShareParams(2, 3), 7)[1])
    save_share(OUT / "rs_systematic_k2n3_i3.dgsh", erasure_coding.encode(b"abcd", 2, 3)[2])
    for share in erasure_coding.sealed_encode(b"sealed golden payload", 2, 3, 9):
        save_share(OUT / f"rs_sealed_k2n3_i{share.index}.dgsh", share)
    obj = b"hello world"
    save_share(OUT / "fragment_n2_i2.dgsh",
               fragmentation.fragment(obj, fragmentation.FragmentationScheme.even(len(obj), 2))[1])
    for p in sorted(OUT.iterdir()):
        print(p.name, p.stat().st_size)


if __name__ == "__main__":
    main()
