"""Simulation service - synthetic panels written in the ingest layout."""

from analysis.simulation import SimulatedPanels, simulate
from core.models import SimSpec
from core.storage import FileStore, PanelRepository
from core.storage.files import network_to_json


class SimulationService:

    def run(self, spec: SimSpec, out_dir: str) -> SimulatedPanels:
        panels = simulate(spec)
        store = FileStore(out_dir)
        repo = PanelRepository(store)
        repo.save("log_rv", panels.log_rv)
        repo.save("returns", panels.returns)
        for name, panel in panels.exog.items():
            repo.save(name, panel)
        store.write_text("network.json", network_to_json(panels.network))
        store.write_json("true_coefficients.json", spec.coefficients)
        return panels
