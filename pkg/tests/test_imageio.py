import numpy as np
import pytest

from svdenoise import imageio
from svdenoise.errors import FormatError, ManifestError, PgmParseError

FIXTURES = ["tiny_p2.pgm", "rand8_p2.pgm", "rand8_p5.pgm", "rand16_p2.pgm", "rand16_p5.pgm", "maxval1000_p5.pgm"]


def test_hand_written_p2(data_dir):
    buf = imageio.read_pgm(data_dir / "tiny_p2.pgm")
    assert (buf.rows, buf.cols, buf.maxval, buf.depth) == (2, 2, 255, 8)
    assert buf.samples.ravel().tolist() == [0, 64, 128, 255]


def test_single_line_p2():
    buf = imageio.parse_pgm(b"P2 2 2 255 0 64 128 255")
    assert buf.samples.ravel().tolist() == [0, 64, 128, 255]


@pytest.mark.parametrize("name", FIXTURES)
@pytest.mark.parametrize("plain", [False, True])
def test_round_trip(data_dir, tmp_path, name, plain):
    original = imageio.read_pgm(data_dir / name)
    out = tmp_path / "copy.pgm"
    imageio.write_pgm(out, original, plain=plain)
    again = imageio.read_pgm(out)
    assert again.maxval == original.maxval
    assert again.samples.dtype == original.samples.dtype
    assert again.samples.tobytes() == original.samples.tobytes()


def test_p5_default_bytes_identical(data_dir, tmp_path):
    for name in ("rand8_p5.pgm", "rand16_p5.pgm"):
        imageio.write_pgm(tmp_path / name, imageio.read_pgm(data_dir / name))
        assert (tmp_path / name).read_bytes() == (data_dir / name).read_bytes()


def test_16bit_is_big_endian():
    buf = imageio.parse_pgm(b"P5\n1 1\n65535\n\x01\x02")
    assert buf.samples[0, 0] == 258 and buf.depth == 16


def test_header_comments():
    buf = imageio.parse_pgm(b"P5\n# c1\n2 # c2\n1\n# c3\n255\n\x07\x08")
    assert buf.samples.tolist() == [[7, 8]]


@pytest.mark.parametrize(
    "data, offset",
    [
        (b"P7\n1 1\n255\n\x00", 0),
        (b"P5\n2 2\n255\n\x00\x00\x00", 14),
        (b"P5\n1 1\n70000\n\x00\x00", 7),
        (b"P5\n1 1\n0\n\x00", 7),
        (b"P2\n2 1\n10\n3 11\n", 12),
        (b"P5\n1 1\n", 7),
        (b"P2\n1 x\n", 5),
    ],
)
def test_parse_errors_carry_offset(data, offset):
    with pytest.raises(PgmParseError) as info:
        imageio.parse_pgm(data)
    assert info.value.offset == offset


def test_matrix_conversion_round_trip(data_dir):
    for name in FIXTURES:
        buf = imageio.read_pgm(data_dir / name)
        back = imageio.from_matrix(imageio.to_matrix(buf), buf.depth)
        assert back.samples.tobytes() == buf.samples.tobytes()


def test_from_matrix_rounding_and_clamping():
    buf = imageio.from_matrix([[-3.2, 127.5, 127.49, 300.0, 0.5]])
    assert buf.samples.tolist() == [[0, 128, 127, 255, 1]]
    assert imageio.from_matrix([[70000.0, 2.5]], 16).samples.tolist() == [[65535, 3]]


def test_to_mask():
    buf = imageio.ImageBuffer(np.array([[0, 127, 128, 255]], dtype=np.uint8))
    assert imageio.to_mask(buf).tolist() == [[False, False, True, True]]


def test_raw_round_trip(tmp_path, rng):
    m = rng.standard_normal((3, 5))
    imageio.write_raw(tmp_path / "m.raw", m)
    assert imageio.read_raw(tmp_path / "m.raw").tobytes() == m.tobytes()
    data = (tmp_path / "m.raw").read_bytes()
    assert data[:8] == imageio.RAW_MAGIC
    (tmp_path / "bad.raw").write_bytes(data[:-1])
    with pytest.raises(FormatError):
        imageio.read_raw(tmp_path / "bad.raw")


def _touch(path):
    path.write_bytes(b"P2 1 1 255 0")
    return path


def test_manifest(tmp_path):
    for n in ("a.pgm", "am.pgm", "b.pgm", "bm.pgm"):
        _touch(tmp_path / n)
    (tmp_path / "empty.csv").write_text("")
    assert len(imageio.load_manifest(tmp_path / "empty.csv")) == 0
    (tmp_path / "m.csv").write_text("# header\nb, b.pgm, bm.pgm\n\na, a.pgm, am.pgm  # trailing\n")
    m = imageio.load_manifest(tmp_path / "m.csv")
    assert [e.identifier for e in m] == ["b", "a"]
    assert m.entries[1].image_path == tmp_path / "a.pgm"


def test_manifest_errors(tmp_path):
    _touch(tmp_path / "a.pgm")
    (tmp_path / "dup.csv").write_text("a, a.pgm, a.pgm\nb, a.pgm, a.pgm\na, a.pgm, a.pgm\n")
    with pytest.raises(ManifestError, match="line 3") as info:
        imageio.load_manifest(tmp_path / "dup.csv")
    assert info.value.line == 3
    (tmp_path / "missing.csv").write_text("a, a.pgm, nope.pgm\n")
    with pytest.raises(ManifestError, match="line 1"):
        imageio.load_manifest(tmp_path / "missing.csv")
    assert len(imageio.load_manifest(tmp_path / "missing.csv", check_files=False)) == 1
    (tmp_path / "short.csv").write_text("\n\na, a.pgm\n")
    with pytest.raises(ManifestError, match="line 3"):
        imageio.load_manifest(tmp_path / "short.csv")


def test_write_manifest_round_trip(tmp_path):
    paths = [_touch(tmp_path / n) for n in ("x.pgm", "xm.pgm")]
    imageio.write_manifest(tmp_path / "out.csv", [("x", *paths)])
    (entry,) = imageio.load_manifest(tmp_path / "out.csv").entries
    assert (entry.identifier, entry.image_path, entry.mask_path) == ("x", *paths)
