"""The catalog: dataset profiles, segment vectors, and connector routing.

Implements the data-source contract the executor reads from, so a profiled
catalog can be handed straight to plan execution.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConnectorError, EmptyDataset, SemaflowError, UnknownDataset
from ..executor.table import Table
from ..plan_ir import Schema
from ..provider.base import ChatProvider, Embedder
from .connectors import Connector, FileConnector
from .profiler import (
    MAX_SAMPLE_ROWS,
    DatasetProfile,
    detect_tables,
    extracted_to_table,
    summarize_structured,
    summarize_unstructured,
)
from .segmenter import segment_text
from .vectors import VectorStore

EXTRACTED_CONNECTOR = "extracted"
SEGMENT_COLLECTION = "catalog"


@dataclass
class ProfileReport:
    profiled: list[str] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    extracted: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "profiled": self.profiled,
            "skipped": [list(s) for s in self.skipped],
            "extracted": self.extracted,
            "warnings": self.warnings,
        }


class Catalog:
    def __init__(
        self,
        store_dir: str | Path,
        embedder: Embedder,
        chat: ChatProvider | None = None,
        agent_model: str = "default",
        segmentation_mode: str = "rule",
    ):
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self.embedder = embedder
        self.chat = chat
        self.agent_model = agent_model
        self.segmentation_mode = segmentation_mode
        self.vectors = VectorStore(self.store_dir / "catalog.db")
        self.connectors: dict[str, Connector] = {}
        self.warnings: list[str] = []
        self._profiles: dict[str, DatasetProfile] = {}
        self._profiles_path = self.store_dir / "profiles.json"
        extracted_dir = self.store_dir / "extracted"
        extracted_dir.mkdir(exist_ok=True)
        self.register_connector(FileConnector(EXTRACTED_CONNECTOR, extracted_dir))
        self._load_profiles()

    # -- persistence ---------------------------------------------------------

    def _load_profiles(self):
        if self._profiles_path.exists():
            data = json.loads(self._profiles_path.read_text(encoding="utf-8"))
            self._profiles = {
                name: DatasetProfile.from_json(doc) for name, doc in data.items()
            }

    def _save_profiles(self):
        data = {name: p.to_json() for name, p in sorted(self._profiles.items())}
        self._profiles_path.write_text(
            json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    # -- connectors -----------------------------------------------------------

    def register_connector(self, connector: Connector):
        self.connectors[connector.name] = connector

    def describe_connectors(self) -> list[dict]:
        return [
            self.connectors[name].describe().to_dict()
            for name in sorted(self.connectors)
        ]

    # -- profiling -------------------------------------------------------------

    def profile_all(self, connector_names: list[str] | None = None) -> ProfileReport:
        report = ProfileReport()
        names = sorted(connector_names or self.connectors.keys())
        for cname in names:
            connector = self.connectors.get(cname)
            if connector is None:
                report.skipped.append((cname, f"no connector named '{cname}'"))
                continue
            if cname == EXTRACTED_CONNECTOR:
                continue  # extracted datasets are profiled during extraction
            for dataset, locator in connector.list_datasets():
                self._profile_one(connector, dataset, locator, report)
        return report

    def _profile_one(
        self, connector: Connector, dataset: str, locator: str, report: ProfileReport
    ):
        try:
            raw = connector.data_profile(locator)
        except EmptyDataset as e:
            report.skipped.append((dataset, str(e)))
            return
        except SemaflowError as e:
            report.skipped.append((dataset, str(e)))
            return
        if raw.kind == "structured":
            profile = self._profile_structured(connector.name, dataset, locator, raw)
        else:
            profile = self._profile_unstructured(
                connector.name, dataset, locator, raw.text or "", raw.format, report
            )
        self._profiles[dataset] = profile
        self._save_profiles()
        report.profiled.append(dataset)

    def _related_segments(self, query: str) -> list[str]:
        if self.vectors.count(SEGMENT_COLLECTION) == 0:
            return []
        hits = self.search(query, level="fine", k=3)
        return [h["text"] for h in hits]

    def _profile_structured(self, cname, dataset, locator, raw) -> DatasetProfile:
        sample = [list(r) for r in raw.rows[:MAX_SAMPLE_ROWS]]
        cols = ", ".join(c.name for c in raw.schema.columns)
        summary, warnings = summarize_structured(
            dataset,
            raw.schema,
            sample,
            self.chat,
            self.agent_model,
            related=self._related_segments(f"{dataset} {cols}"),
        )
        self.warnings.extend(warnings)
        return DatasetProfile(
            name=dataset,
            kind="structured",
            format=raw.format,
            source=(cname, locator),
            schema=raw.schema,
            sample_rows=sample,
            summary=summary,
            row_count=len(raw.rows),
        )

    def _profile_unstructured(
        self, cname, dataset, locator, text, format_, report: ProfileReport
    ) -> DatasetProfile:
        counts = {}
        self.vectors.delete_where(SEGMENT_COLLECTION, dataset=dataset)
        for level in ("coarse", "fine"):
            segments, seg_warnings = segment_text(
                text,
                level,
                mode=self.segmentation_mode,
                chat=self.chat,
                model=self.agent_model,
            )
            self.warnings.extend(seg_warnings)
            counts[level] = len(segments)
            if segments:
                vecs = self.embedder.embed(segments)
                for i, (seg, vec) in enumerate(zip(segments, vecs)):
                    self.vectors.upsert(
                        SEGMENT_COLLECTION,
                        key=f"{dataset}|{level}|{i:05d}",
                        vector=vec,
                        text=seg,
                        meta={"dataset": dataset, "level": level},
                    )

        for extracted in detect_tables(text, dataset):
            table = extracted_to_table(extracted)
            path = self.store_dir / "extracted" / f"{extracted.name}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(extracted.header)
                for row in extracted.string_rows:
                    writer.writerow(row)
            self._profile_one(
                self.connectors[EXTRACTED_CONNECTOR],
                extracted.name,
                path.name,
                report,
            )
            report.extracted.append(extracted.name)
            _ = table  # parsed now only to validate the block; profiling re-reads the csv

        first = ""
        hits = self.vectors.entries(SEGMENT_COLLECTION, dataset=dataset, level="coarse")
        if hits:
            first = hits[0]["text"]
        summary, warnings = summarize_unstructured(dataset, first, self.chat, self.agent_model)
        self.warnings.extend(warnings)
        return DatasetProfile(
            name=dataset,
            kind="unstructured",
            format=format_,
            source=(cname, locator),
            schema=None,
            sample_rows=[],
            summary=summary,
            row_count=0,
            segment_counts=counts,
        )

    # -- profile access ----------------------------------------------------------

    def profiles(self) -> list[DatasetProfile]:
        return [self._profiles[name] for name in sorted(self._profiles)]

    def profile(self, name: str) -> DatasetProfile:
        if name not in self._profiles:
            raise UnknownDataset(name)
        return self._profiles[name]

    # -- segment search ------------------------------------------------------------

    def search(
        self, query: str, level: str = "fine", k: int = 5, scoring: str = "dense"
    ) -> list[dict]:
        vec = self.embedder.embed([query])[0]
        return self.vectors.search(
            SEGMENT_COLLECTION,
            query_vector=vec,
            query_text=query,
            k=k,
            scoring=scoring,
            level=level,
        )

    # -- DataSource contract ---------------------------------------------------------

    def schema_of(self, dataset: str) -> Schema:
        profile = self.profile(dataset)
        if profile.schema is None:
            raise UnknownDataset(dataset)
        return profile.schema

    def load_table(self, dataset: str) -> Table:
        profile = self.profile(dataset)
        cname, locator = profile.source
        connector = self.connectors.get(cname)
        if connector is None:
            raise ConnectorError(f"ConnectorError: no connector named '{cname}'")
        return connector.read_table(locator)

    def row_count(self, dataset: str) -> int:
        return self.profile(dataset).row_count

    def run_sql(self, connector: str, sql_text: str) -> Table:
        conn = self.connectors.get(connector)
        if conn is None:
            raise ConnectorError(f"ConnectorError: no connector named '{connector}'")
        query = getattr(conn, "query", None)
        if query is None:
            raise ConnectorError(
                f"ConnectorError: connector '{connector}' does not accept SQL"
            )
        return query(sql_text)
