import json

import pytest

from relesc.harness import (LEMMA_IDS, audit_constants, check,
                            default_profiles, random_instance, run_suite)
from relesc.places import INF, Place
from relesc.rational import UsageError


class TestSampling:
    def test_deterministic(self):
        p = default_profiles()[0]
        a = random_instance(1, p)
        b = random_instance(1, p)
        assert a.serialize() == b.serialize()

    def test_distinct_seeds_distinct_instances(self):
        p = default_profiles()[0]
        seen = {random_instance(s, p).serialize() for s in range(1000)}
        assert len(seen) == 1000

    def test_mu_preconditions_guaranteed(self):
        for s in range(25):
            inst = random_instance(s, default_profiles()[2])
            for D in inst.mu_divisors:
                assert not D.contains_hyperplane_at_infinity()
                assert not D.contains_origin_point()
            assert inst.resamples >= 0

    def test_sl_matrices(self):
        from relesc.rational import det_exact
        for s in range(20):
            inst = random_instance(s, default_profiles()[2])
            assert det_exact(inst.f.A) == 1


class TestChecks:
    def test_every_lemma_runs(self):
        inst = random_instance(7, default_profiles()[0])
        for lemma in LEMMA_IDS:
            res = check(lemma, inst)
            assert res.lemma == lemma
            assert res.holds or res.vacuous is False

    def test_unknown_lemma(self):
        inst = random_instance(7, default_profiles()[0])
        with pytest.raises(UsageError):
            check("NOT_A_LEMMA", inst)

    def test_targeted_instances_meet_gates(self):
        hits = {"TC_MU": 0, "KEY_MU": 0, "KEY_LAMBDA": 0, "BASIN": 0}
        profs = [p for p in default_profiles() if p.targeted]
        n = 0
        for s in range(12):
            for p in profs:
                inst = random_instance(s * 31 + 5, p)
                n += 1
                for lemma in hits:
                    if not check(lemma, inst).vacuous:
                        hits[lemma] += 1
        for lemma, count in hits.items():
            assert count >= n // 2, (lemma, count, n)


class TestSuite:
    def test_small_suite_clean(self):
        rep = run_suite(12, seed=7)
        assert rep.ok
        for name in LEMMA_IDS:
            assert rep.stats[name].failures == 0

    def test_report_deterministic(self):
        a = run_suite(6, seed=42).to_json()
        b = run_suite(6, seed=42).to_json()
        assert a == b

    def test_lemma_filter(self):
        rep = run_suite(3, seed=1, lemmas=("PRODUCT_FORMULA", "NORM_PROD"))
        assert set(rep.stats) == {"PRODUCT_FORMULA", "NORM_PROD"}
        assert rep.ok

    def test_table_renders(self):
        rep = run_suite(3, seed=1, lemmas=("PRODUCT_FORMULA",))
        assert "PRODUCT_FORMULA" in rep.table()
        json.loads(rep.to_json())

    def test_trials_validated(self):
        with pytest.raises(UsageError):
            run_suite(0)

    def test_empty_profile_list(self):
        rep = run_suite(5, seed=1, profiles=[])
        assert rep.ok
        assert all(s.total == 0 for s in rep.stats.values())


class TestConstantsAudit:
    def test_clean_everywhere(self):
        for N, d in ((1, 2), (1, 3), (2, 2), (2, 3)):
            for v in (INF, Place(2), Place(3), Place(5)):
                assert audit_constants(N, d, v) == []

    def test_detects_corruption(self, monkeypatch):
        import relesc.places as places_mod
        real = places_mod.place_constants

        def corrupted(N, d, v):
            pc = real(N, d, v)
            return type(pc)(N=pc.N, d=pc.d, place=pc.place,
                            c1=pc.c1.scaled(2), c2=pc.c2, c3=pc.c3, c4=pc.c4,
                            c5=pc.c5, c8=pc.c8, c9=pc.c9)

        monkeypatch.setattr(places_mod, "place_constants", corrupted)
        problems = audit_constants(1, 2, INF)
        assert any("c1" in p for p in problems)
