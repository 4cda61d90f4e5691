import math

import pint
import pytest

import boostlab


def test_split_vector():
    assert boostlab.split_vector("0.5,0") == [0.5, 0.0]
    assert boostlab.split_vector("-0.5 0") == [-0.5, 0.0]
    assert boostlab.split_vector("1,2,3,4", 4) == [1.0, 2.0, 3.0, 4.0]
    with pytest.raises(ValueError):
        boostlab.split_vector("1,2,3", 2)
    with pytest.raises(ValueError):
        boostlab.split_vector("a,b")


def test_units_of_angle():
    assert boostlab.units_of_angle("90deg") == pytest.approx(math.pi / 2)
    assert boostlab.units_of_angle("1.2rad") == pytest.approx(1.2)
    # A bare number is read as radians
    assert boostlab.units_of_angle(0.5) == pytest.approx(0.5)
    with pytest.raises(pint.errors.DimensionalityError):
        boostlab.units_of_angle("3m")


def test_positive_duration():
    assert boostlab.positive_duration("2.5") == 2.5
    assert boostlab.positive_duration(1) == 1.0
    with pytest.raises(ValueError):
        boostlab.positive_duration(0)
    with pytest.raises(ValueError):
        boostlab.positive_duration("-1")
    # Times are nondimensional
    with pytest.raises(pint.errors.DimensionalityError):
        boostlab.positive_duration("5s")


def test_worker_count(monkeypatch):
    monkeypatch.setenv(boostlab.THREADS_ENV, "1")
    assert boostlab.worker_count() == 1
    monkeypatch.setenv(boostlab.THREADS_ENV, "not a number")
    assert boostlab.worker_count(3) == 3
    monkeypatch.delenv(boostlab.THREADS_ENV)
    assert boostlab.worker_count(5) == 5
