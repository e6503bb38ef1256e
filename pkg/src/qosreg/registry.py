"""The end-to-end pipeline: publish -> predict -> discover -> rank -> reputation."""

from __future__ import annotations

import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import discovery, reputation, selector
from .config import Config
from .errors import DuplicateId, MalformedXml, NoCandidates
from .predictor import FeatureMatrix, RegressionModel, compute_wsdl_metrics, fit_and_evaluate, predict
from .predictor.pcr import EvaluationReport
from .qos import parse_quantity
from .store import RegistryStore, ServiceRecord
from .wsxml import DiscoveryQuery, RequestMessage, TModelDocument

log = logging.getLogger(__name__)


@dataclass
class Selection:
    ranking: selector.Ranking
    answer: reputation.FinalAnswer


class Registry:
    """Store, current model and configuration bundled behind the operations clients call."""

    def __init__(self, config: Config = Config(), store: Optional[RegistryStore] = None, fetcher=None):
        self.config = config
        self.store = store if store is not None else RegistryStore(config.journal or None)
        self.fetcher = fetcher or discovery.fetch_url
        self._model: Optional[RegressionModel] = None
        self._train_lock = threading.Lock()
        if config.model and Path(config.model).exists():
            self._model = RegressionModel.from_json(Path(config.model).read_text(encoding="utf-8"))

    @property
    def model(self) -> Optional[RegressionModel]:
        return self._model

    # -- publish ---------------------------------------------------------------

    def publish(self, tmodel: TModelDocument, wsdl_text: Optional[str] = None) -> str:
        if tmodel.ws_id in self.store:
            # fail before any network traffic; store.publish re-checks under its lock
            raise DuplicateId(tmodel.ws_id)
        if wsdl_text is None and self.config.fetch_wsdl and tmodel.overview_url:
            wsdl_text = self._fetch_wsdl(tmodel.overview_url)
        ws_id = self.store.publish(tmodel, wsdl_text)
        model = self._model
        if model is not None:
            self._predict(self.store.get(ws_id), model)
        return ws_id

    def _fetch_wsdl(self, url: str) -> Optional[str]:
        try:
            result = self.fetcher(url, self.config.fetch_timeout_ms)
        except Exception as exc:  # an invalid URL only means no WSDL
            log.info("not fetching %s: %s", url, exc)
            return None
        if not result.ok or result.body is None:
            log.info("WSDL at %s unavailable: %s", url, result.category)
            return None
        return result.body.decode("utf-8", errors="replace")

    def features_for(self, record: ServiceRecord, model: RegressionModel) -> dict[str, float]:
        """Model inputs available for a published service.

        Interface metrics come from the cached WSDL; code metrics may be
        supplied by the provider as keyedReferences named like the
        model's feature columns.
        """
        features: dict[str, float] = {}
        if record.wsdl_text:
            try:
                features.update(compute_wsdl_metrics(record.wsdl_text).as_features())
            except MalformedXml:
                log.info("WSDL for %s is not well-formed", record.ws_id)
        wanted = set(model.feature_names)
        for ref in record.tmodel.keyed_references:
            if ref.key_name in wanted:
                try:
                    features[ref.key_name] = parse_quantity(ref.key_value).value
                except ValueError:
                    pass
        return {k: v for k, v in features.items() if k in wanted}

    def _predict(self, record: ServiceRecord, model: RegressionModel) -> bool:
        features = self.features_for(record, model)
        if not features:
            return False
        q = predict(model, features)
        self.store.set_predicted_qos(record.ws_id, q)
        cred = reputation.credibility(q, record.assured_qos, self.config.tolerance)
        compared = len(reputation.compared_properties(q, record.assured_qos))
        self.store.set_credibility(record.ws_id, cred, compared)
        return True

    # -- training ----------------------------------------------------------------

    def train(self, data: FeatureMatrix) -> EvaluationReport:
        """Fit on 80% (by default), evaluate on the rest, persist and hot-swap the model.

        Every stored service with usable features is re-predicted with the
        new model.
        """
        with self._train_lock:
            k_max = self.config.k_max or None
            model, report = fit_and_evaluate(data, self.config.ratio, self.config.seed, k_max)
            if self.config.model:
                path = Path(self.config.model)
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(path.suffix + ".tmp")
                tmp.write_text(model.to_json(), encoding="utf-8")
                os.replace(tmp, path)
            self._model = model
            for record in self.store.list_all():
                self._predict(record, model)
        return report

    # -- discovery / selection ------------------------------------------------------

    def discover(self, query: DiscoveryQuery) -> list[str]:
        return discovery.find_tmodel(query, self.store)

    def qos_source(self, ws_id: str):
        rec = self.store.get(ws_id)
        return rec.predicted_qos, rec.assured_qos

    def select(self, request: RequestMessage) -> Selection:
        candidates = discovery.find_by_function(request.functional_req, self.store)
        if not candidates:
            raise NoCandidates(f"no service matches {request.functional_req!r}")
        tree = selector.build_tree(request)
        ranking = selector.rank(tree, candidates, self.qos_source, self.config.scorer)
        answer = reputation.finalize(
            self.store,
            ranking.services,
            request.max_service,
            self.config.reputation_mode,
            count_usage=self.config.usage_on == "handoff",
        )
        return Selection(ranking, answer)

    def confirm_usage(self, ws_id: str) -> int:
        return reputation.record_usage(self.store, ws_id)
