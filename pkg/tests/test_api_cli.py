import shutil
import urllib.error
import urllib.request
import xml.etree.ElementTree as ET

import pytest

import _scenario as sc
from qosreg.api import App
from qosreg.cli import main
from qosreg.config import Config
from qosreg.predictor import ingest_csv_text
from qosreg.registry import Registry
from qosreg.server import RegistryServer


def config(tmp_path, **kw):
    return Config(journal=str(tmp_path / "j.jsonl"), model=str(tmp_path / "model.json"), fetch_wsdl=False, **kw)


@pytest.fixture
def app(tmp_path):
    return App(Registry(config(tmp_path)))


@pytest.fixture
def seeded(tmp_path):
    registry = Registry(config(tmp_path))
    sc.seed_registry(registry)
    return tmp_path


def http(url, method="GET", body=None):
    req = urllib.request.Request(url, data=body, method=method)
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()


def run_cli(capsysbinary, *argv):
    code = main(list(argv))
    return code, capsysbinary.readouterr().out


class TestEndpoints:
    def test_publish_sample_tmodel(self, app, sample_tmodel):
        r = app.handle("POST", "/publish", sample_tmodel.encode())
        assert r.status == 201
        assert ET.fromstring(r.body).get("ws_id") == "abdc12345"
        assert app.handle("POST", "/publish", sample_tmodel.encode()).status == 409

    def test_publish_malformed(self, app):
        r = app.handle("POST", "/publish", b'<tModel tModelKey="k"><ws_id></ws_id></tModel>')
        node = ET.fromstring(r.body)
        assert r.status == 400 and node.get("element") == "ws_id"
        assert app.handle("POST", "/publish", b"<tModel").status == 400

    def test_discover(self, app, sample_query):
        r = app.handle("POST", "/discover", sample_query.encode())
        assert r.status == 200 and ET.fromstring(r.body).get("count") == "0"
        for i in range(60):
            doc = f'<tModel tModelKey="k{i}"><function>Stock quote {i}</function><ws_id>s{i:02d}</ws_id></tModel>'
            assert app.handle("POST", "/publish", doc.encode()).status == 201
        root = ET.fromstring(app.handle("POST", "/discover", sample_query.encode()).body)
        assert root.get("count") == "50" and root.get("tM_find_Key") == "UUID:DB77450D-9FA8"
        assert [n.get("ws_id") for n in root] == [f"s{i:02d}" for i in range(50)]

    def test_select_no_match(self, app, sample_request):
        assert app.handle("POST", "/select", sample_request.encode()).status == 404

    def test_select_bad_request(self, app):
        assert app.handle("POST", "/select", b"<find_service/>").status == 400

    def test_train_too_few_rows(self, app):
        body = "ws_id,f,latency\na,1,2\nb,2,3\nc,3,4\n".encode()
        assert app.handle("POST", "/train", body).status == 422

    def test_train_bad_csv(self, app):
        assert app.handle("POST", "/train", b"ws_id,f,latency\na,x,2\n").status == 400

    def test_train_path_reference(self, app, tmp_path):
        path = tmp_path / "train.csv"
        path.write_text(sc.training_csv())
        r = app.handle("POST", "/train", f'<train path="{path}"/>'.encode())
        assert r.status == 200 and r.body.startswith(b"property,mae,rmse")

    def test_train_deterministic(self, tmp_path):
        a = App(Registry(config(tmp_path / "a")))
        b = App(Registry(config(tmp_path / "b")))
        body = sc.training_csv().encode()
        assert a.handle("POST", "/train", body).body == b.handle("POST", "/train", body).body

    def test_train_exact(self, app):
        r = app.handle("POST", "/train", sc.training_csv().encode())
        rows = [line.split(",") for line in r.body.decode().splitlines()[1:]]
        assert all(float(row[1]) < 1e-6 for row in rows)

    def test_services_and_health(self, app):
        assert ET.fromstring(app.handle("GET", "/services").body).get("count") == "0"
        assert ET.fromstring(app.handle("GET", "/health").body).get("status") == "ok"
        assert app.handle("GET", "/nowhere").status == 404
        assert app.handle("GET", "/reputation/ghost").status == 404

    def test_select_seeded(self, seeded, sample_request):
        app = App(Registry(config(seeded)))
        first = ET.fromstring(app.handle("POST", "/select", sample_request.encode()).body)
        assert [n.get("ws_id") for n in first.iter("service")] == sc.EXPECTED_TOP2
        assert first.find("warning") is not None
        second = ET.fromstring(app.handle("POST", "/select", sample_request.encode()).body)
        assert [n.get("ws_id") for n in second.iter("service")] == sc.EXPECTED_TOP2
        reps = {n.get("ws_id"): float(n.get("reputation")) for n in second.iter("service")}
        assert reps == {"cc-gamma": 6.0, "cc-alpha": 1.0}

    def test_usage_confirm(self, seeded, sample_request):
        app = App(Registry(config(seeded, usage_on="confirm")))
        app.handle("POST", "/select", sample_request.encode())
        rep = ET.fromstring(app.handle("GET", "/reputation/cc-gamma").body)
        assert rep.get("usage_count") == "0" and rep.get("credibility") == "5"
        assert ET.fromstring(app.handle("POST", "/usage/cc-gamma").body).get("usage_count") == "1"


class TestTransportParity:
    def test_http_and_cli_bytes_match(self, seeded, tmp_path, capsysbinary, sample_request, sample_query):
        other = tmp_path / "cli"
        other.mkdir()
        shutil.copy(seeded / "j.jsonl", other / "j.jsonl")
        shutil.copy(seeded / "model.json", other / "model.json")
        req = tmp_path / "req.xml"
        req.write_text(sample_request)
        query = tmp_path / "q.xml"
        query.write_text(sample_query)
        bad = tmp_path / "bad.xml"
        bad.write_text("<find_service><functionalReq>x</functionalReq></find_service>")

        server = RegistryServer(("127.0.0.1", 0), App(Registry(config(seeded))))
        server.start_background()
        sets = ["--set", f"journal={other / 'j.jsonl'}", "--set", f"model={other / 'model.json'}",
                "--set", "fetch_wsdl=false"]
        try:
            cases = [
                (("GET", "/services", None), ("services",)),
                (("POST", "/discover", sample_query.encode()), ("discover", str(query))),
                (("POST", "/select", sample_request.encode()), ("select", str(req))),
                (("POST", "/select", sample_request.encode()), ("select", str(req))),
                (("GET", "/reputation", None), ("reputation",)),
                (("GET", "/reputation/cc-alpha", None), ("reputation", "cc-alpha")),
                (("POST", "/select", bad.read_bytes()), ("select", str(bad))),
            ]
            for (method, path, body), argv in cases:
                status, http_body = http(server.url + path, method, body)
                code, cli_body = run_cli(capsysbinary, *sets, *argv)
                assert http_body == cli_body, argv
                assert code == (0 if status < 400 else 2)
        finally:
            server.shutdown()
            server.server_close()

    def test_restart_reproduces_responses(self, seeded):
        query = b'<find_tModel><categoryBag><keyedReference tM_find_Key="x" keyName="credit card"/></categoryBag></find_tModel>'
        before = App(Registry(config(seeded)))
        services = before.handle("GET", "/services").body
        discover = before.handle("POST", "/discover", query).body
        after = App(Registry(config(seeded)))
        assert after.handle("GET", "/services").body == services
        assert after.handle("POST", "/discover", query).body == discover
        assert after.registry.model.to_json() == before.registry.model.to_json()


class TestCli:
    def sets(self, tmp_path):
        return ["--set", f"journal={tmp_path / 'j.jsonl'}", "--set", f"model={tmp_path / 'm.json'}",
                "--set", "fetch_wsdl=false"]

    def test_publish_then_services(self, tmp_path, capsysbinary):
        doc = tmp_path / "t.xml"
        doc.write_text(sc.tmodel_xml("cc-beta"))
        wsdl = tmp_path / "w.xml"
        wsdl.write_text(sc.wsdl_text("cc-beta"))
        code, out = run_cli(capsysbinary, *self.sets(tmp_path), "publish", str(doc), "--wsdl", str(wsdl))
        assert code == 0 and b'wsdl="cached"' in out
        code, out = run_cli(capsysbinary, *self.sets(tmp_path), "publish", str(doc))
        assert code == 2 and b'code="409"' in out
        code, out = run_cli(capsysbinary, *self.sets(tmp_path), "services")
        assert code == 0 and b'ws_id="cc-beta"' in out

    def test_usage_errors(self, tmp_path, capsysbinary):
        assert run_cli(capsysbinary, *self.sets(tmp_path), "publish", str(tmp_path / "missing.xml"))[0] == 1
        assert run_cli(capsysbinary, *self.sets(tmp_path), "--set", "scorer=nope", "services")[0] == 1
        assert run_cli(capsysbinary, *self.sets(tmp_path), "--set", "oops", "services")[0] == 1
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 1

    def test_data_error(self, tmp_path, capsysbinary):
        bad = tmp_path / "bad.xml"
        bad.write_text("<tModel")
        code, out = run_cli(capsysbinary, *self.sets(tmp_path), "publish", str(bad))
        assert code == 2 and b'code="400"' in out

    def test_train_and_evaluate_with_reports(self, tmp_path, capsysbinary):
        csv_path = tmp_path / "train.csv"
        csv_path.write_text(sc.training_csv())
        out_dir = tmp_path / "report"
        code, out = run_cli(capsysbinary, *self.sets(tmp_path), "train", str(csv_path), "--report-dir",
                            str(out_dir), "--table")
        assert code == 0 and out.startswith(b"property,mae,rmse")
        assert (out_dir / "evaluation.csv").read_bytes() == out
        assert (out_dir / "parity.png").stat().st_size > 0
        code, out = run_cli(capsysbinary, *self.sets(tmp_path), "evaluate", str(csv_path))
        assert code == 0 and b"\nall," in out

    def test_evaluate_without_model(self, tmp_path, capsysbinary):
        csv_path = tmp_path / "train.csv"
        csv_path.write_text(sc.training_csv())
        assert run_cli(capsysbinary, *self.sets(tmp_path), "evaluate", str(csv_path))[0] == 1

    def test_select_report_dir(self, seeded, tmp_path, capsysbinary, sample_request):
        req = tmp_path / "req.xml"
        req.write_text(sample_request)
        out_dir = tmp_path / "sel"
        sets = ["--set", f"journal={seeded / 'j.jsonl'}", "--set", f"model={seeded / 'model.json'}"]
        code, out = run_cli(capsysbinary, *sets, "select", str(req), "--report-dir", str(out_dir))
        assert code == 0
        assert (out_dir / "selection.xml").read_bytes() == out
        assert (out_dir / "ranking.csv").read_text().splitlines()[1].startswith("1,cc-alpha,")
        assert (out_dir / "ranking.png").stat().st_size > 0

    def test_validate(self, tmp_path, capsysbinary, stub_server, closed_port_url):
        stub_server.routes["/a"] = (200, b"<definitions/>", 0)
        rows = tmp_path / "rows.csv"
        rows.write_text(f"ws_id,url\na,{stub_server.url('/a')}\nb,{closed_port_url}\n")
        out_dir = tmp_path / "val"
        code, out = run_cli(capsysbinary, *self.sets(tmp_path), "validate", str(rows), "--timeout-ms", "1000",
                            "--report-dir", str(out_dir))
        assert code == 0
        assert out.decode().splitlines()[1:] == [f"a,{stub_server.url('/a')},200,ok",
                                                 f"b,{closed_port_url},,connection-refused"]
        assert (out_dir / "validation.png").exists()

    def test_reputation_report(self, seeded, tmp_path, capsysbinary):
        sets = ["--set", f"journal={seeded / 'j.jsonl'}", "--set", f"model={seeded / 'model.json'}"]
        out_dir = tmp_path / "rep"
        code, out = run_cli(capsysbinary, *sets, "reputation", "--report-dir", str(out_dir))
        assert code == 0 and out.splitlines()[0] == b"ws_id,credibility,usage_count,score,mode"
        assert (out_dir / "reputation.png").exists()


def test_publish_fetches_wsdl(tmp_path, stub_server):
    stub_server.routes["/cc-gamma?wsdl"] = (200, sc.wsdl_text("cc-gamma").encode(), 0)
    registry = Registry(Config(journal=str(tmp_path / "j"), model=str(tmp_path / "m.json")))
    registry.train(ingest_csv_text(sc.training_csv()))
    app = App(registry)
    base = stub_server.url("").rstrip("/")
    r = app.handle("POST", "/publish", sc.tmodel_xml("cc-gamma", base).encode())
    assert b'wsdl="cached"' in r.body and b'predicted="yes"' in r.body
    # dead overviewURL: published without a WSDL or prediction
    r = app.handle("POST", "/publish", sc.tmodel_xml("cc-beta", "http://127.0.0.1:9").encode())
    assert r.status == 201 and b'wsdl="none"' in r.body
