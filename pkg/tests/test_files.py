import numpy as np
import pytest
from scipy.io import wavfile

from dsp.analysis import periodogram
from dsp.channel import ImpulseNoiseSpec, apply_impulse_noise
from dsp.chrestenson import Signal
from dsp.errors import IoError, ParseError, UnsupportedFormat
from utils.files import (
    create_output_dir_if_not_exists,
    load_signal,
    save_noise_record,
    save_psd,
    save_signal,
)


def test_csv_rows_without_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("0,1,0\n1,0,0\n")
    signal = load_signal(path)
    np.testing.assert_array_equal(signal.samples, [1, 0])


def test_save_writes_full_precision_rows(tmp_path):
    path = tmp_path / "x.csv"
    save_signal(Signal([1 + 2j]), path)
    assert path.read_text() == "index,re,im\n0,1,2\n"
    save_signal(Signal([0.1]), path)
    assert path.read_text().splitlines()[1] == "0,0.10000000000000001,0"


def test_empty_signal_saves_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    save_signal([], path)
    assert path.read_text() == "index,re,im\n"


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(8)
    x = Signal(rng.standard_normal(50) * 1e3 + 1j * rng.standard_normal(50) * 1e-7, sample_rate=44100)
    path = tmp_path / "x.csv"
    save_signal(x, path)
    y = load_signal(path, sample_rate=44100)
    assert np.max(np.abs(y.samples - x.samples)) <= 1e-12
    assert y.sample_rate == 44100


@pytest.mark.parametrize(
    "body,position",
    [
        ("index,re,im\n0,1,0\n1,abc,0\n", 3),
        ("index,re,im\n0,1\n", 2),
        ("index,re,im\n0,1,0\n2,1,0\n", 3),
        ("index,real,imag\n0,1,0\n", 1),
    ],
)
def test_csv_parse_errors_report_the_line(tmp_path, body, position):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(ParseError) as info:
        load_signal(path)
    assert info.value.position == position
    assert f"position {position}" in str(info.value)


def test_header_only_csv_cannot_be_loaded(tmp_path):
    path = tmp_path / "empty.csv"
    save_signal([], path)
    with pytest.raises(ParseError):
        load_signal(path)


def test_wav_scaling(tmp_path):
    path = tmp_path / "x.wav"
    wavfile.write(path, 8000, np.array([-32768, 0, 16384, 32767], dtype=np.int16))
    signal = load_signal(path)
    np.testing.assert_array_equal(signal.samples.real, [-1.0, 0.0, 0.5, 32767 / 32768])
    assert signal.sample_rate == 8000
    assert signal.is_real


def test_wav_restrictions(tmp_path):
    stereo = tmp_path / "stereo.wav"
    wavfile.write(stereo, 8000, np.zeros((10, 2), dtype=np.int16))
    with pytest.raises(UnsupportedFormat):
        load_signal(stereo)

    floats = tmp_path / "float.wav"
    wavfile.write(floats, 8000, np.zeros(10, dtype=np.float32))
    with pytest.raises(UnsupportedFormat):
        load_signal(floats)

    garbage = tmp_path / "garbage.wav"
    garbage.write_bytes(b"not a wav file at all")
    with pytest.raises(ParseError):
        load_signal(garbage)


def test_missing_files_and_unknown_formats(tmp_path):
    with pytest.raises(IoError) as info:
        load_signal(tmp_path / "missing.csv")
    assert info.value.exit_code == 3
    with pytest.raises(UnsupportedFormat):
        load_signal(tmp_path / "x.flac")
    with pytest.raises(UnsupportedFormat):
        load_signal(tmp_path / "x.csv", format="mp3")


def test_unwritable_target_is_an_io_error(tmp_path):
    with pytest.raises(IoError):
        save_signal(Signal([1.0]), tmp_path / "missing" / "dir" / "x.csv")


def test_output_dir_creation(tmp_path):
    target = tmp_path / "a" / "b"
    assert create_output_dir_if_not_exists(target) == target
    assert target.is_dir()
    assert create_output_dir_if_not_exists(target) == target


def test_psd_and_noise_csvs(tmp_path):
    psd = periodogram(Signal(np.arange(8.0)))
    save_psd(psd, tmp_path / "psd.csv")
    lines = (tmp_path / "psd.csv").read_text().splitlines()
    assert lines[0] == "bin,freq_cycles_per_sample,power"
    assert len(lines) == 9
    assert lines[1].startswith("-4,-0.5,")

    _, record = apply_impulse_noise(Signal(np.ones(30)), ImpulseNoiseSpec(period=10, seed=0))
    save_noise_record(record, tmp_path / "impulses.csv")
    lines = (tmp_path / "impulses.csv").read_text().splitlines()
    assert lines[0] == "position,re,im"
    assert [line.split(",")[0] for line in lines[1:]] == ["0", "10", "20"]
