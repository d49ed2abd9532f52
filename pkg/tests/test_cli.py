import csv

import numpy as np
import pytest

from conftest import smooth_image
from graykeep.cli import CSV_FIELDS, main
from graykeep.image_core import load_image, save_image
from graykeep.payload import random_bits, read_payload, write_payload


@pytest.fixture
def cover_file(tmp_path, rng):
    img = smooth_image(rng, 48, 48)
    path = tmp_path / "cover.ppm"
    save_image(img, path)
    return path, img


def test_embed_extract_verify(tmp_path, cover_file, capsys):
    path, img = cover_file
    out = tmp_path / "marked.png"
    assert main(["embed", "--cover", str(path), "--out", str(out), "--random-bits", "500",
                 "--seed", "7"]) == 0
    assert "psnr_db=" in capsys.readouterr().out
    rc = main(["extract", "--marked", str(out), "--out-cover", str(tmp_path / "c.ppm"),
               "--out-payload", str(tmp_path / "p.bin")])
    assert rc == 0
    assert np.array_equal(load_image(tmp_path / "c.ppm"), img)
    assert np.array_equal(read_payload(tmp_path / "p.bin"), random_bits(500, 7))
    assert main(["verify", "--cover", str(path), "--marked", str(out)]) == 0


def test_embed_is_deterministic(tmp_path, cover_file):
    path, _ = cover_file
    for name in ("a.ppm", "b.ppm"):
        main(["embed", "--cover", str(path), "--out", str(tmp_path / name), "--random-bits", "300",
              "--seed", "1", "--t1", "4", "--t2", "64"])
    assert (tmp_path / "a.ppm").read_bytes() == (tmp_path / "b.ppm").read_bytes()


def test_embed_payload_file_and_zero_bits(tmp_path, cover_file):
    path, img = cover_file
    write_payload(tmp_path / "s.bin", [1, 0, 1, 1])
    assert main(["embed", "--cover", str(path), "--out", str(tmp_path / "m.ppm"),
                 "--payload", str(tmp_path / "s.bin"), "--method", "li"]) == 0
    assert main(["embed", "--cover", str(path), "--out", str(tmp_path / "z.ppm"),
                 "--random-bits", "0"]) == 0
    assert main(["verify", "--cover", str(path), "--marked", str(tmp_path / "z.ppm")]) == 0


def test_verify_flags_changes_outside_row0(tmp_path, cover_file, capsys):
    path, img = cover_file
    bad = img.copy()
    bad[10, 10] = 255 - bad[10, 10]
    save_image(bad, tmp_path / "bad.ppm")
    assert main(["verify", "--cover", str(path), "--marked", str(tmp_path / "bad.ppm")]) == 1
    assert "(10, 10)" in capsys.readouterr().out


def test_capacity_error_exit_code(tmp_path, cover_file, capsys):
    path, _ = cover_file
    out = tmp_path / "m.ppm"
    rc = main(["embed", "--cover", str(path), "--out", str(out), "--random-bits", "100000"])
    assert rc != 0 and not out.exists()
    assert "error" in capsys.readouterr().err


def test_bad_flags(cover_file):
    path, _ = cover_file
    with pytest.raises(SystemExit):
        main(["embed", "--cover", str(path), "--out", "x.ppm", "--random-bits", "5", "--t1", "3"])
    with pytest.raises(SystemExit):
        main(["embed", "--cover", str(path), "--out", "x.ppm"])
    with pytest.raises(SystemExit):
        main(["bench", "--images", ".", "--csv", "x.csv", "--methods", "bogus"])


def test_extract_truncated_file_writes_nothing(tmp_path, cover_file):
    path, _ = cover_file
    marked = tmp_path / "m.ppm"
    main(["embed", "--cover", str(path), "--out", str(marked), "--random-bits", "100"])
    cut = tmp_path / "cut.ppm"
    cut.write_bytes(marked.read_bytes()[:500])
    rc = main(["extract", "--marked", str(cut), "--out-cover", str(tmp_path / "c.ppm"),
               "--out-payload", str(tmp_path / "p.bin")])
    assert rc != 0
    assert not (tmp_path / "c.ppm").exists() and not (tmp_path / "p.bin").exists()


def test_bench_csv(tmp_path, rng, monkeypatch, capsys):
    monkeypatch.setenv("GRAYKEEP_THREADS", "1")
    folder = tmp_path / "imgs"
    folder.mkdir()
    for name in ("b_img", "a_img"):
        save_image(smooth_image(rng, 40, 40), folder / f"{name}.ppm")
    out = tmp_path / "bench.csv"
    assert main(["bench", "--images", str(folder), "--capacities", "300,100",
                 "--methods", "proposed,hou", "--seed", "3", "--csv", str(out)]) == 0
    assert "0 violations" in capsys.readouterr().out
    with open(out) as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == CSV_FIELDS
        rows = list(reader)
    assert len(rows) == 2 * 2 * 2
    keys = [(r["image"], r["scheme"], int(r["capacity_bits"])) for r in rows]
    assert keys == sorted(keys)
    by_img = {}
    for r in rows:
        if r["scheme"] == "proposed":
            by_img.setdefault(r["image"], []).append((int(r["capacity_bits"]), float(r["psnr_db"])))
    for pts in by_img.values():
        pts.sort()
        assert pts[0][1] >= pts[1][1]
