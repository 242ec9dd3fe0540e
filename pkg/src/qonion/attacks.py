"""Eavesdropper harness: in-transit measurement attacks and what they see.

Hop numbering follows the protocol module: a length-L chain has hops
0..2(L-1)-1, hop 0 being the receiver's first outbound hand-off and the last
hop the final return to the receiver.  A measure-and-resend attacker
measures the j-register in the computational basis and forwards the
collapsed state; permutation oracles map basis states to basis states, so
the receiver's key recovery is unaffected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from scipy import stats as scipy_stats

from .errors import ConfigError
from .protocol import RunConfig, run
from .rng import SplitMix64
from .scheme import ActionTable, CycleAction, act

MEASURE_AND_RESEND = "measure-and-resend"
OBSERVE_CLASSICAL = "observe-classical"


@dataclass(frozen=True)
class InterceptPlan:
    hops: tuple[int, ...]
    mode: str = MEASURE_AND_RESEND
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "InterceptPlan":
        if not isinstance(data, dict):
            raise ConfigError("plan: expected a JSON object")
        unknown = set(data) - {"hops", "mode", "seed"}
        if unknown:
            raise ConfigError(f"plan.{sorted(unknown)[0]}: unknown field")
        hops = data.get("hops")
        if (not isinstance(hops, (list, tuple)) or not hops
                or any(not isinstance(h, int) or isinstance(h, bool) or h < 0 for h in hops)):
            raise ConfigError("plan.hops: expected a non-empty list of hop indices")
        mode = data.get("mode", MEASURE_AND_RESEND)
        if mode not in (MEASURE_AND_RESEND, OBSERVE_CLASSICAL):
            raise ConfigError(f"plan.mode: unknown mode {mode!r}")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("plan.seed: expected an integer")
        return cls(hops=tuple(hops), mode=mode, seed=seed)

    @classmethod
    def from_json(cls, text: str) -> "InterceptPlan":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"plan: invalid JSON: {exc}") from exc


def hop_count(chain_length: int) -> int:
    return 2 * (chain_length - 1)


def _check_hop(hop: int, chain_length: int) -> None:
    if not 0 <= hop < hop_count(chain_length):
        raise ConfigError(
            f"plan.hops: hop {hop} outside 0..{hop_count(chain_length) - 1} "
            f"for a {chain_length}-actor chain"
        )


def expected_hop_support(table: ActionTable, config: RunConfig, hop: int) -> list[int]:
    """Classical replay: the j-invariants in transit at a hop, over all branches."""
    chain = list(config.chain)
    _check_hop(hop, len(chain))
    receiver = CycleAction(table, chain[-1])
    omega = config.omega if config.procedure == 3 else 0
    width = config.big_omega if config.procedure == 3 else table.r
    values = [act(receiver, table.j0, i + omega) for i in range(width)]
    # arrival shifts per hop: forward route is receiver -> ... -> sender
    forward_actors = list(reversed(chain[1:-1])) + [chain[0]]
    return_actors = chain[1:-1]
    for h in range(hop):
        if h < len(forward_actors):
            action = CycleAction(table, forward_actors[h])
        else:
            action = CycleAction(table, return_actors[h - len(forward_actors)], direction=-1)
        values = [act(action, v, 1) for v in values]
    return sorted(set(values))


def _uniformity(counts: dict[int, int]) -> dict:
    observed = [counts[k] for k in sorted(counts)]
    if len(observed) < 2:
        return {"statistic": 0.0, "p_value": 1.0}
    result = scipy_stats.chisquare(observed)
    return {"statistic": float(result.statistic), "p_value": float(result.pvalue)}


@dataclass
class AttackReport:
    mode: str
    config: dict
    plan: dict
    per_hop: dict[int, dict]
    keys: dict
    transcript_stats: dict

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "config": self.config,
            "plan": self.plan,
            "per_hop": {str(h): payload for h, payload in sorted(self.per_hop.items())},
            "keys": self.keys,
            "transcript_stats": self.transcript_stats,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)


def intercept_measure(config: RunConfig, plan: InterceptPlan):
    """Measure-and-resend at a single hop; returns (report, completed transcript)."""
    if plan.mode == OBSERVE_CLASSICAL:
        return _observe_classical(config, plan)
    if plan.mode != MEASURE_AND_RESEND:
        raise ConfigError(f"plan.mode: unsupported mode {plan.mode!r}")
    if len(plan.hops) != 1:
        raise ConfigError("plan.hops: measure-and-resend intercepts exactly one hop")
    if config.procedure not in (3, 4):
        raise ConfigError("config.procedure: interception needs a quantum run (3 or 4)")
    target = plan.hops[0]
    _check_hop(target, len(config.chain))

    table = config.load_table()
    attacker_seeds = SplitMix64(plan.seed).spawn_seeds(config.shots)
    observations: list[int] = []

    def interceptor(hop, registers, state, shot):
        if hop != target:
            return False
        rng = SplitMix64(attacker_seeds[shot])
        outcome, _ = state.measure(["j"], rng)
        observations.append(outcome["j"])
        return True

    transcript = run(config, interceptor=interceptor)
    counts: dict[int, int] = {}
    for j in observations:
        counts[j] = counts.get(j, 0) + 1
    support = expected_hop_support(table, config, target)
    report = AttackReport(
        mode=plan.mode,
        config=config.to_dict(),
        plan={"hops": list(plan.hops), "mode": plan.mode, "seed": plan.seed},
        per_hop={
            target: {
                "observations": {str(k): v for k, v in sorted(counts.items())},
                "observed_support": sorted(counts),
                "expected_support": support,
                "support_matches": sorted(counts) == support if config.shots >= len(support) else None,
                "uniformity": _uniformity(counts),
            }
        },
        keys={
            "expected_key": transcript.stats["expected_key"],
            "recovered_keys": transcript.stats["recovered_keys"],
            "receiver_key_unchanged": transcript.stats["all_keys_expected"],
        },
        transcript_stats=transcript.stats,
    )
    return report, transcript


def _observe_classical(config: RunConfig, plan: InterceptPlan):
    """Read the classical j-invariants off Procedure-1 hand-offs at the given hops."""
    if config.procedure != 1:
        raise ConfigError("plan.mode: observe-classical applies to procedure 1 runs")
    for hop in plan.hops:
        _check_hop(hop, len(config.chain))
    transcript = run(config)
    seen = {
        event["hop"]: event["value"]
        for event in transcript.events
        if event["kind"] == "handoff"
    }
    report = AttackReport(
        mode=plan.mode,
        config=config.to_dict(),
        plan={"hops": list(plan.hops), "mode": plan.mode, "seed": plan.seed},
        per_hop={hop: {"observed_value": seen[hop]} for hop in plan.hops},
        keys={
            "expected_key": transcript.stats["expected_key"],
            "recovered_keys": {str(transcript.stats["recovered_key"]): 1},
            "receiver_key_unchanged": transcript.stats["key_matches"],
        },
        transcript_stats=transcript.stats,
    )
    return report, transcript


def endpoint_correlation(config: RunConfig, seed: int = 0):
    """Best-case two-point observation when the index register is transmitted.

    The attacker measures (index, j) on the first hop and again on the last;
    the collapsed index matches, and the residual work is the group-action
    inversion instance returned in the report (stated, not solved).
    """
    if config.procedure != 3:
        raise ConfigError("config.procedure: endpoint correlation targets procedure 3")
    if not config.transmit_index:
        raise ConfigError("config.transmit_index: endpoint correlation needs the index "
                          "register in transit (flag off)")
    table = config.load_table()
    first_hop = 0
    last_hop = hop_count(len(config.chain)) - 1
    attacker_seeds = SplitMix64(seed).spawn_seeds(config.shots)
    first_obs: list[tuple[int, int]] = []
    last_obs: list[tuple[int, int]] = []
    rngs: dict[int, SplitMix64] = {}

    def interceptor(hop, registers, state, shot):
        if hop not in (first_hop, last_hop):
            return False
        rng = rngs.setdefault(shot, SplitMix64(attacker_seeds[shot]))
        outcome, _ = state.measure(["index", "j"], rng)
        (first_obs if hop == first_hop else last_obs).append((outcome["index"], outcome["j"]))
        return True

    transcript = run(config, interceptor=interceptor)
    pairs = []
    i_counts: dict[int, int] = {}
    for (i1, j1), (i2, j2) in zip(first_obs, last_obs):
        pairs.append({
            "first": {"index": i1, "j": j1},
            "last": {"index": i2, "j": j2},
            "index_matches": i1 == i2,
            "vectorization_instance": {
                "given": {"j0": table.j0, "target": j1},
                "find": "group element m with m * j0 = target",
                "then": f"recover the sender key as m^-1 * {j2}",
            },
        })
        i_counts[i1] = i_counts.get(i1, 0) + 1
    report = AttackReport(
        mode="endpoint-correlation",
        config=config.to_dict(),
        plan={"hops": [first_hop, last_hop], "mode": "endpoint-correlation", "seed": seed},
        per_hop={
            first_hop: {"observations": [list(p) for p in first_obs]},
            last_hop: {"observations": [list(p) for p in last_obs]},
        },
        keys={
            "expected_key": transcript.stats["expected_key"],
            "recovered_keys": transcript.stats["recovered_keys"],
            "receiver_key_unchanged": transcript.stats["all_keys_expected"],
        },
        transcript_stats={
            "index_histogram": {str(k): v for k, v in sorted(i_counts.items())},
            "index_always_matches": all(p["index_matches"] for p in pairs),
            "index_uniformity": _uniformity(i_counts),
        },
    )
    return report, pairs, transcript
