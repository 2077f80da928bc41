#!/usr/bin/env python3
"""Compare the fixed configuration presets against a genetic search.

Evaluates config1..config6 on a synthetic scenario, then runs the GA over
the default gene ranges on the same data and prints the winner.

    python scripts/ga_vs_presets.py --scenario lookalike --seed 0
"""

import argparse

from mttsort import ga, seqio, synth
from mttsort.model import PRESETS, format_config


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scenario", default="lookalike")
    parser.add_argument("--seed", type=int, default=0, help="GA seed")
    parser.add_argument("--population", type=int, default=10)
    parser.add_argument("--generations", type=int, default=50)
    parser.add_argument("--mutation", type=float, default=0.1)
    parser.add_argument("--crossover", type=float, default=0.7)
    args = parser.parse_args()

    spec = synth.scenario_preset(args.scenario)
    gt, dets = synth.generate(spec)
    seq = seqio.Sequence(
        name=spec.name, frame_count=spec.frames, width=spec.arena[0],
        height=spec.arena[1], embedding_dim=spec.embedding_dim,
        detections=tuple(dets), gt=tuple(gt))

    print(f"scenario={args.scenario} frames={spec.frames}")
    scores = {}
    for name in ("config1", "config2", "config3",
                 "config4", "config5", "config6"):
        scores[name] = ga.evaluate_fitness(PRESETS[name], [seq])
        print(f"{name}: score {scores[name]:.4f}")

    ga_config = ga.GAConfig(
        population_size=args.population, max_generations=args.generations,
        mutation_rate=args.mutation, crossover_rate=args.crossover,
        seed=args.seed)
    best, best_score, history = ga.run_ga(ga.DEFAULT_GENE_SPECS, ga_config, [seq])
    print(f"ga (pop {args.population}, gens {args.generations}): "
          f"score {best_score:.4f} after {len(history)} generations")

    top_preset = max(scores, key=scores.get)
    verdict = "beats" if best_score > scores[top_preset] else \
        "matches" if best_score == scores[top_preset] else "trails"
    print(f"ga {verdict} the best preset ({top_preset}, "
          f"{scores[top_preset]:.4f})")
    print("\nbest configuration found:")
    print(format_config(best), end="")
    print("\nhistory:")
    print(ga.format_history(history), end="")


if __name__ == "__main__":
    main()
