"""
The eleven published associations
=================================

The bundled fixture holds eleven exposure-outcome associations from four
observational domains, given by E-value only. Points are rebuilt from the
E-values and the missing standard errors take the reconstruction default.
"""

from confound_prob import analyze_batch, load_paper_cases, paper_reconstruction, rank_by_robustness, summarize_domains

cases = load_paper_cases()
prior, config = paper_reconstruction()
print(f"s = {config.default_s}, sigma_theta = {prior.sigma_theta}, sigma_gamma = {prior.sigma_gamma}\n")

results = analyze_batch(cases, prior, config)

print(f"{'case':<8} {'domain':<22} {'E':>6} {'P(Gamma>=E)':>12}  flags")
for r in rank_by_robustness(results):
    print(f"{r.case_id:<8} {r.domain:<22} {r.evalue:6.3f} {r.p_exceed:12.4f}  {r.flags_text}")

print("\nper-domain mean and range")
for domain, s in summarize_domains(results).items():
    print(f"  {domain:<22} n={s['n']}  mean {s['mean']:.4f}  range [{s['min']:.4f}, {s['max']:.4f}]")
