#!/usr/bin/env python3
"""
Pruebas del servicio HTTP del toolkit de percolación.

Con pytest se ejecutan contra la aplicación en proceso (TestClient). Como script
(`python test_microservice.py --url http://localhost:8000`) recorre los mismos
endpoints contra un servidor en marcha e imprime las respuestas.
"""
import json

import httpx
import pytest
from fastapi.testclient import TestClient

from app.main import app

BASE_URL = "http://localhost:8000"
TIMEOUT = 120


class PercolationClient:
    """Cliente para interactuar con el servicio (en proceso o remoto)"""

    def __init__(self, session: httpx.Client):
        self.session = session

    def health_check(self) -> httpx.Response:
        return self.session.get("/health")

    def get_status(self) -> httpx.Response:
        return self.session.get("/status")

    def list_lemmas(self) -> httpx.Response:
        return self.session.get("/lemmas")

    def lemma_check(self, lemma: str, budget: float = 0.05, seed: int = 7) -> httpx.Response:
        return self.session.post("/lemma-check", json={"lemma": lemma, "budget": budget, "seed": seed})

    def crossing(self, **payload) -> httpx.Response:
        return self.session.post("/crossing", json=payload)

    def galton_watson(self, **payload) -> httpx.Response:
        return self.session.post("/branching/gw", json=payload)

    def renorm_params(self, **payload) -> httpx.Response:
        return self.session.post("/renorm/params", json=payload)

    def oriented(self, **payload) -> httpx.Response:
        return self.session.post("/oriented", json=payload)


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as test_client:
        yield PercolationClient(test_client)


# === PRUEBAS BÁSICAS ===


def test_health(client):
    response = client.health_check()
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"
    assert "X-Process-Time" in response.headers


def test_status_reports_settings(client):
    body = client.get_status().json()
    assert body["status"] == "operational"
    assert {"seed", "workers", "mc_samples"} <= set(body["settings"])
    assert body["lemmas"] >= 10


def test_versioned_prefix(client):
    assert client.session.get("/api/v1/health").status_code == 200


def test_lemmas_listed(client):
    lemmas = client.list_lemmas().json()
    for key in ("lemma2", "lemma4", "thm5-rigorous", "eq1-consistency", "oriented-0.9"):
        assert key in lemmas


# === COMPROBACIONES ===


@pytest.mark.parametrize("lemma", ["lemma4", "thm5-rigorous", "eq-worked-example"])
def test_deterministic_lemmas_pass(client, lemma):
    response = client.lemma_check(lemma)
    assert response.status_code == 200
    body = response.json()
    assert body["passed"] is True
    assert all(r["lemma"] == lemma for r in body["reports"])


def test_unknown_lemma_is_404_envelope(client):
    response = client.lemma_check("lemma99")
    assert response.status_code == 404
    error = response.json()["error"]
    assert error["code"] == 404
    assert "lemma99" in error["message"]


def test_validation_error_envelope(client):
    response = client.lemma_check("lemma4", budget=0)
    assert response.status_code == 422
    assert response.json()["error"]["type"] == "validation_error"


# === SIMULACIÓN ===


def test_crossing_tiny_area_never_crosses(client):
    response = client.crossing(eps=1.0, area=0.05, L=10, trials=5, seed=3)
    assert response.status_code == 200
    body = response.json()
    assert body["estimate"]["crossings"] == 0
    assert body["lower_bound_nc"] == pytest.approx(1 + 1 / (3 ** 0.5 * 3.141592653589793))


def test_crossing_rejects_small_box(client):
    assert client.crossing(eps=1.0, area=2.0, L=5, trials=5).status_code == 422


def test_galton_watson_curves(client):
    body = client.galton_watson(eta=0.1, T=5, runs=200, seed=1).json()
    assert len(body["mean"]) == 6
    assert body["mean"][0] == 1.0
    assert body["extinct"][0] == 0.0
    assert body["survival"] is None


def test_galton_watson_truncated(client):
    body = client.galton_watson(eta=0.5, K=20, T=10, runs=500, seed=1).json()
    assert body["survival"]["precondition_ok"] is True
    assert 0 <= body["survival"]["frequency"] <= 1


def test_renorm_params_defaults(client):
    body = client.renorm_params(eta=0.1, c0=0.1).json()
    assert body["params"]["n"] == 100
    assert body["params"]["T"] == 576
    assert set(body["flags"]) >= {"eq1", "eq6"}
    assert body["intensity"] == pytest.approx(1.1 / 3.141592653589793)


def test_renorm_params_rejects_negative_eta(client):
    assert client.renorm_params(eta=-0.1).status_code == 422


def test_oriented_certain_and_closed(client):
    assert client.oriented(p=1.0, depth=20, trials=10, seed=2).json()["survived"] == 10
    assert client.oriented(p=0.0, depth=20, trials=10, seed=2).json()["survived"] == 0


def print_section(title: str):
    print(f"\n{'=' * 60}\n🔍 {title}\n{'=' * 60}")


def print_result(test_name: str, response: httpx.Response):
    icon = "✅" if response.status_code < 400 else "❌"
    print(f"\n{icon} {test_name} ({response.status_code}):")
    print(json.dumps(response.json(), indent=2, ensure_ascii=False)[:2000])


def run_live(base_url: str):
    """Recorre los endpoints contra un servidor en marcha"""
    print(f"🚀 Iniciando pruebas contra {base_url}")
    with httpx.Client(base_url=base_url, timeout=TIMEOUT) as session:
        client = PercolationClient(session)

        print_section("PRUEBAS BÁSICAS")
        print_result("Health Check", client.health_check())
        print_result("Estado del Servicio", client.get_status())
        print_result("Comprobaciones", client.list_lemmas())

        print_section("COMPROBACIONES")
        for lemma in ("lemma4", "thm5-rigorous", "eq-worked-example"):
            print_result(lemma, client.lemma_check(lemma))

        print_section("SIMULACIÓN")
        print_result("Cruce ε=1, |A|=4.6", client.crossing(eps=1.0, area=4.6, L=30, trials=20))
        print_result("Galton–Watson η=0.1", client.galton_watson(eta=0.1, T=20, runs=2000))
        print_result("Parámetros η=0.1", client.renorm_params(eta=0.1, c0=0.1))
        print_result("Orientada p=0.9", client.oriented(p=0.9, depth=100, trials=200))

    print("\n🏁 Pruebas completadas")


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Pruebas del servicio de percolación")
    parser.add_argument("--url", default=BASE_URL, help="URL del servicio")
    args = parser.parse_args()
    run_live(args.url)
