# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import logging
from abc import ABC, abstractmethod
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .channel import af_rates, df_rates, sample_gains
from .config import NetworkConfig, derive_params
from .mode import AfState, DfState, Mode, state_labels
from .rng import stream
from .tally import Estimate, Tally, ratio_estimate

logger = logging.getLogger(__name__)

N_BATCHES = 32
_CHUNK = 1 << 16

AF_LINKS = ("12", "21")
DF_LINKS = ("1r", "2r", "r1", "r2")


@dataclass(frozen=True)
class SimResult:
    """
    Monte Carlo outcome of one or more replications. `batches` hold the tallies the
    standard errors are computed from: internal batches of a single run, or one
    tally per replication after merging. `rounds` counts broadcast rounds for AF
    and completed cycles (broadcasts that both terminals decode) for DF.
    """
    mode: Mode
    rate: float
    codeword_bits: int
    quanta: Tuple[float, float, float]
    total: Tally
    batches: Tuple[Tally, ...]
    seed: int
    replications: int = 1
    codeword_attempts: Optional[Dict[str, Tuple[int, ...]]] = None

    @property
    def slots(self) -> int:
        return self.total.slots

    @property
    def rounds(self) -> int:
        return self.total.rounds

    @property
    def bits_t1_to_t2(self) -> int:
        return self.total.bits_t1_to_t2

    @property
    def bits_t2_to_t1(self) -> int:
        return self.total.bits_t2_to_t1

    @property
    def energy(self) -> float:
        return self.total.energy(self.quanta)

    @property
    def links(self) -> Tuple[str, ...]:
        return AF_LINKS if self.mode is Mode.AF else DF_LINKS

    @property
    def state_occupancy(self) -> Dict[str, int]:
        return dict(zip(state_labels(self.mode), self.total.occupancy))

    @property
    def occupancy_fractions(self) -> Tuple[float, ...]:
        return tuple(c / self.slots for c in self.total.occupancy)

    @property
    def empirical_goodput(self) -> Estimate:
        scale = self.rate / self.codeword_bits
        return ratio_estimate([b.bits * scale for b in self.batches], [b.slots for b in self.batches])

    @property
    def empirical_eb(self) -> Estimate:
        return ratio_estimate([b.energy(self.quanta) for b in self.batches], [b.bits for b in self.batches])

    @property
    def empirical_outage(self) -> Dict[str, Estimate]:
        return {
            link: ratio_estimate([b.link_outages[i] for b in self.batches],
                                 [b.link_attempts[i] for b in self.batches])
            for i, link in enumerate(self.links)
        }

    @property
    def broadcast_exit_fractions(self) -> Tuple[float, ...]:
        total = sum(self.total.broadcast_outcomes)
        return tuple(c / total if total else 0.0 for c in self.total.broadcast_outcomes)

    def to_dict(self) -> Dict[str, object]:
        goodput, eb = self.empirical_goodput, self.empirical_eb
        res = {
            "mode": self.mode.value,
            "rate": self.rate,
            "seed": self.seed,
            "replications": self.replications,
            "slots": self.slots,
            "rounds": self.rounds,
            "bits_t1_to_t2": self.bits_t1_to_t2,
            "bits_t2_to_t1": self.bits_t2_to_t1,
            "energy": self.energy,
            "transmissions": dict(zip(("t1", "t2", "relay"), self.total.transmissions)),
            "state_occupancy": self.state_occupancy,
            "broadcast_outcomes": list(self.total.broadcast_outcomes),
            "empirical_goodput": {"value": goodput.value, "stderr": goodput.stderr},
            "empirical_eb": {"value": eb.value, "stderr": eb.stderr},
            "empirical_outage": {
                link: {"value": e.value, "stderr": e.stderr} for link, e in self.empirical_outage.items()
            },
        }
        if self.codeword_attempts is not None:
            res["codeword_attempts"] = {k: list(v) for k, v in self.codeword_attempts.items()}
        return res


class ProtocolSimulator(ABC):
    """
    Slot-accurate simulation of one relay protocol. A run is split into a fixed
    number of consecutive batches; protocol state carries over between them.
    """
    mode: Mode

    def __init__(self, cfg: NetworkConfig, rate: float, paper_units: bool = False):
        if rate <= 0:
            raise ValueError(f"Simulation needs a rate > 0, got {rate}")
        self._cfg = cfg
        self._params = derive_params(cfg)
        self._rate = rate
        # paper units: slot length L/R, bandwidth dropped
        bandwidth = 1.0 if paper_units else cfg.bandwidth_hz
        slot = cfg.codeword_bits / (rate * bandwidth)
        self._quanta = (cfg.p1 * slot, cfg.p2 * slot, cfg.pr * slot)

    def run(self, size: int, rng: np.random.Generator, seed: int = 0) -> SimResult:
        """
        Simulates `size` units (rounds for AF, slots for DF)
        :param size: number of units, >= 1
        :param rng: the replication's random stream
        :param seed: master seed recorded in the result
        :return: the result with per-batch tallies
        """
        if size < 1:
            raise ValueError(f"Simulation size must be >= 1, got {size}")
        self._reset()
        n_batches = min(N_BATCHES, size)
        base, extra = divmod(size, n_batches)
        batches = []
        for i in range(n_batches):
            n = base + (1 if i < extra else 0)
            parts = [self._simulate(min(_CHUNK, n - done), rng) for done in range(0, n, _CHUNK)]
            batches.append(reduce(Tally.__add__, parts))
        total = reduce(Tally.__add__, batches)
        return SimResult(
            mode=self.mode,
            rate=self._rate,
            codeword_bits=self._cfg.codeword_bits,
            quanta=self._quanta,
            total=total,
            batches=tuple(batches),
            seed=seed,
            codeword_attempts=self._codeword_attempts(),
        )

    def _reset(self) -> None:
        pass

    def _codeword_attempts(self) -> Optional[Dict[str, Tuple[int, ...]]]:
        return None

    @abstractmethod
    def _simulate(self, n: int, rng: np.random.Generator) -> Tally:
        ...


class AfSimulator(ProtocolSimulator):
    """
    Each round: both terminals transmit, the relay amplifies and broadcasts, each
    direction delivers a codeword iff its cascade rate reaches R
    """
    mode = Mode.AF

    def __init__(self, cfg: NetworkConfig, rate: float, track_codewords: bool = False, paper_units: bool = False):
        super().__init__(cfg, rate, paper_units)
        self._track_codewords = track_codewords

    def _reset(self) -> None:
        # rounds already spent on the codeword currently in flight, per direction
        self._pending = [0, 0]
        self._attempts: List[List[np.ndarray]] = [[], []]

    def _simulate(self, n: int, rng: np.random.Generator) -> Tally:
        gains = sample_gains(self._params, rng, n)
        r12, r21 = af_rates(gains, self._cfg, self._params)
        ok12 = r12 >= self._rate
        ok21 = r21 >= self._rate
        if self._track_codewords:
            self._track(0, ok12)
            self._track(1, ok21)
        n12, n21 = int(ok12.sum()), int(ok21.sum())
        both = int(np.count_nonzero(ok12 & ok21))
        only12 = n12 - both
        only21 = n21 - both
        neither = n - both - only12 - only21
        occupancy = [0] * len(AfState)
        occupancy[AfState.SB.value] = n
        occupancy[AfState.S0.value] = neither
        occupancy[AfState.S1.value] = only12
        occupancy[AfState.S2.value] = only21
        occupancy[AfState.S3.value] = both
        L = self._cfg.codeword_bits
        return Tally(
            slots=2 * n,
            rounds=n,
            bits_t1_to_t2=n12 * L,
            bits_t2_to_t1=n21 * L,
            transmissions=(n, n, n),
            occupancy=tuple(occupancy),
            link_attempts=(n, n),
            link_outages=(n - n12, n - n21),
            # T1 decodes x2 exactly when the 2->1 cascade succeeds
            broadcast_outcomes=(both, only21, only12, neither),
        )

    def _track(self, direction: int, ok: np.ndarray) -> None:
        idx = np.flatnonzero(ok)
        if idx.size == 0:
            self._pending[direction] += ok.size
            return
        first = idx[0] + 1 + self._pending[direction]
        self._attempts[direction].append(np.concatenate(([first], np.diff(idx))))
        self._pending[direction] = ok.size - 1 - int(idx[-1])

    def _codeword_attempts(self) -> Optional[Dict[str, Tuple[int, ...]]]:
        if not self._track_codewords:
            return None
        res = {}
        for direction, link in enumerate(AF_LINKS):
            parts = self._attempts[direction]
            counts = np.bincount(np.concatenate(parts)) if parts else np.zeros(1, dtype=int)
            res[link] = tuple(int(c) for c in counts)
        return res


class DfSimulator(ProtocolSimulator):
    """
    Sequential DF: the relay polls T1 until it holds x1, polls T2 until it holds x2,
    then broadcasts the combined codeword until both terminals have decoded
    """
    mode = Mode.DF

    def _reset(self) -> None:
        self._state = DfState.S0.value

    def _simulate(self, n: int, rng: np.random.Generator) -> Tally:
        ok = df_rates(sample_gains(self._params, rng, n), self._cfg) >= self._rate
        ok1r, ok2r, okr1, okr2 = (ok[:, i].tolist() for i in range(4))
        s0, s1, s2, s3 = (s.value for s in DfState)
        L = self._cfg.codeword_bits

        state = self._state
        occupancy = [0, 0, 0, 0]
        outages = [0, 0, 0, 0]
        exits = [0, 0, 0, 0]
        polls1 = polls2 = broadcasts = 0
        bits12 = bits21 = 0
        for i in range(n):
            occupancy[state] += 1
            if state == s0 or state == s2:
                polls1 += 1
                if ok1r[i]:
                    state = s1 if state == s0 else s3
                else:
                    outages[0] += 1
            elif state == s1:
                polls2 += 1
                if ok2r[i]:
                    state = s3
                else:
                    outages[1] += 1
            else:
                broadcasts += 1
                got_x2, got_x1 = okr1[i], okr2[i]
                if got_x2:
                    bits21 += L
                else:
                    outages[2] += 1
                if got_x1:
                    bits12 += L
                else:
                    outages[3] += 1
                if got_x2 and got_x1:
                    state = s0
                    exits[0] += 1
                elif got_x2:
                    # T2 still needs x1: the relay keeps it and asks T2 for a new x2
                    state = s1
                    exits[1] += 1
                elif got_x1:
                    state = s2
                    exits[2] += 1
                else:
                    exits[3] += 1
        self._state = state

        return Tally(
            slots=n,
            rounds=exits[0],
            bits_t1_to_t2=bits12,
            bits_t2_to_t1=bits21,
            transmissions=(polls1, polls2, broadcasts),
            occupancy=tuple(occupancy),
            link_attempts=(polls1, polls2, broadcasts, broadcasts),
            link_outages=tuple(outages),
            broadcast_outcomes=tuple(exits),
        )


def _simulator(cfg: NetworkConfig, mode: Mode, rate: float, track_codewords: bool = False,
               paper_units: bool = False) -> ProtocolSimulator:
    if mode is Mode.AF:
        return AfSimulator(cfg, rate, track_codewords=track_codewords, paper_units=paper_units)
    return DfSimulator(cfg, rate, paper_units)


def simulate_af(cfg: NetworkConfig, rate: float, n_rounds: int, seed: int,
                track_codewords: bool = False, paper_units: bool = False) -> SimResult:
    return AfSimulator(cfg, rate, track_codewords, paper_units).run(n_rounds, stream(seed, 0), seed)


def simulate_df(cfg: NetworkConfig, rate: float, n_slots: int, seed: int, paper_units: bool = False) -> SimResult:
    return DfSimulator(cfg, rate, paper_units).run(n_slots, stream(seed, 0), seed)


def _run_replication(task: Tuple[NetworkConfig, Mode, float, int, int, int, bool, bool]) -> SimResult:
    cfg, mode, rate, size, master_seed, index, track_codewords, paper_units = task
    simulator = _simulator(cfg, mode, rate, track_codewords, paper_units)
    return simulator.run(size, stream(master_seed, index), master_seed)


@contextmanager
def replication_pool(workers: int) -> Iterator[Optional[Executor]]:
    """
    Worker pool shared by every replication batch of one command; None when serial
    """
    if workers <= 1:
        yield None
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield pool


def run_replications(
    cfg: NetworkConfig,
    mode: Mode,
    rate: float,
    per_rep_size: int,
    n_reps: int,
    master_seed: int,
    workers: int = 1,
    track_codewords: bool = False,
    paper_units: bool = False,
    pool: Optional[Executor] = None,
) -> SimResult:
    """
    Runs independent replications and merges them in replication order
    :param per_rep_size: rounds (AF) or slots (DF) per replication
    :param n_reps: number of replications, >= 1
    :param master_seed: seed from which every replication's stream is derived
    :param workers: worker processes when no pool is given; the result does not depend on it
    :param paper_units: energy quanta without the bandwidth
    :param pool: executor to reuse, see replication_pool
    :return: the merged result, standard errors taken across replications
    """
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")
    tasks = [(cfg, mode, rate, per_rep_size, master_seed, i, track_codewords, paper_units) for i in range(n_reps)]
    logger.info("running %d %s replication(s) of %d at R=%g on %d worker(s)",
                n_reps, mode.name, per_rep_size, rate, workers)
    if pool is not None and n_reps > 1:
        results = list(pool.map(_run_replication, tasks))
    elif workers > 1 and n_reps > 1:
        with ProcessPoolExecutor(max_workers=min(workers, n_reps)) as own_pool:
            results = list(own_pool.map(_run_replication, tasks))
    else:
        results = [_run_replication(task) for task in tasks]
    if n_reps == 1:
        return results[0]
    return merge_results(results)


def merge_results(results: List[SimResult]) -> SimResult:
    first = results[0]
    attempts = None
    if first.codeword_attempts is not None:
        attempts = {}
        for link in first.codeword_attempts:
            hists = [r.codeword_attempts[link] for r in results]
            width = max(len(h) for h in hists)
            attempts[link] = tuple(sum(h[i] for h in hists if i < len(h)) for i in range(width))
    return SimResult(
        mode=first.mode,
        rate=first.rate,
        codeword_bits=first.codeword_bits,
        quanta=first.quanta,
        total=reduce(Tally.__add__, (r.total for r in results)),
        batches=tuple(r.total for r in results),
        seed=first.seed,
        replications=len(results),
        codeword_attempts=attempts,
    )
