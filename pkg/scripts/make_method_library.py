"""Regenerate src/biasaudit/data/method_library.json."""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parents[1] / "src/biasaudit/data/method_library.json"

SEED = [
    {
        "id": "A-0-1",
        "intention": ("Detect distribution bias in a categorical feature (gender) "
                      "within the healthcare domain using K-Means clustering and an "
                      "entropy-based balance measure."),
        "method": {
            "step_1": "Apply K-Means clustering to gender and height attributes (10 clusters).",
            "step_2": "Use MapReduce to process clusters and extract gender category distributions.",
            "step_3": "Calculate Shannon entropy of gender: H = -sum((c_i/n) * log(c_i/n)).",
            "step_4": "Compute bias balance score: Balance = H / log k.",
        },
        "title": ("Automated Bias Detection within the Cardiovascular Disease Dataset "
                  "using MapReduce Framework with Balance Measure"),
        "article_link": "https://ijisae.org/index.php/IJISAE/article/view/5688/4429",
        "field": "Healthcare",
        "year": 2024,
        "tags": {"bias_type": "distribution", "data_type": "cat_dist",
                 "domain": "healthcare"},
    },
    {
        "id": "A-0-2",
        "intention": ("Detect distribution bias in categorical features using the "
                      "max/min ratio of category frequencies in text classification "
                      "datasets."),
        "method": {
            "step_1": "Detect categorical (non-numeric) features.",
            "step_2": "Compute relative frequency for each category.",
            "step_3": "Identify max and min category ratios; extreme values indicate bias.",
            "step_4": "Calculate the max/min ratio as the bias score.",
            "step_5": "Assign bias level using thresholds: >100 (Extreme), >10 (Significant), etc.",
        },
        "title": ("Selection of the Most Relevant Terms Based on a Max-Min Ratio "
                  "Metric for Text Classification"),
        "article_link": "https://www.sciencedirect.com/science/article/abs/pii/S0957417418304457",
        "field": "Text Classification",
        "year": 2018,
        "tags": {"bias_type": "distribution", "data_type": "cat_dist",
                 "domain": "text classification"},
    },
]

# (metric id, scenario tag, bias type, intention, steps)
BUILTINS = [
    ("shannon_balance", "cat_dist", "distribution",
     "Measure imbalance of a categorical feature with Shannon entropy and the "
     "balance score H / ln k.",
     ["Count category frequencies of the cleaned column.",
      "Compute Shannon entropy H with natural logarithms.",
      "Normalize by ln k to obtain the balance score in [0, 1]."]),
    ("max_min_ratio", "cat_dist", "distribution",
     "Measure imbalance of a categorical feature as the ratio of the most to the "
     "least frequent category.",
     ["Count category frequencies of the cleaned column.",
      "Divide the largest count by the smallest positive count.",
      "Large ratios indicate dominance of a single category."]),
    ("entropy", "cat_dist", "distribution",
     "Measure spread of a categorical feature with Shannon entropy and its "
     "normalized form.",
     ["Count category frequencies.",
      "Compute H and H / ln k."]),
    ("gini", "cat_dist", "distribution",
     "Measure concentration of a categorical feature with a Laplace-smoothed "
     "Gini index and sample-size correction.",
     ["Smooth counts as (c_i + 1) / (n + k).",
      "Compute G = 1 - sum(q_i^2) and normalize by 1 - 1/k."]),
    ("relative_risk", "cat_dist", "distribution",
     "Compare observed category frequencies against the uniform expectation via "
     "relative risk ratios.",
     ["Compute p_i / (1/k) per category.",
      "Report the largest absolute deviation from 1."]),
    ("skewness", "num_dist", "distribution",
     "Assess asymmetry of a numerical feature with moment-based skewness.",
     ["Compute population central moments m2 and m3.",
      "Report g1 = m3 / m2^(3/2)."]),
    ("kurtosis", "num_dist", "distribution",
     "Assess tail weight of a numerical feature with excess kurtosis.",
     ["Compute population central moments m2 and m4.",
      "Report g2 = m4 / m2^2 - 3."]),
    ("outlier", "num_dist", "distribution",
     "Quantify outlier prevalence in a numerical feature with z-score screening.",
     ["Standardize with the population sd.",
      "Report the fraction of |z| above the cutoff (default 3)."]),
    ("cohens_d_mad", "num_dist", "distribution",
     "Assess asymmetry of a numerical feature as the mean-median gap scaled by "
     "1.4826 times the median absolute deviation.",
     ["Compute the median and MAD.",
      "Report (mean - median) / (1.4826 * MAD)."]),
    ("quantile_deviation", "num_dist", "distribution",
     "Assess asymmetry of a numerical feature from the position of the median "
     "inside the interquartile range.",
     ["Compute Q1, Q2, Q3 with linear interpolation.",
      "Report |(Q3 - Q2) / (Q3 - Q1) - 0.5|."]),
    ("cramers_v", "cat_cat", "correlation",
     "Measure association between two categorical features with Cramer's V from "
     "the chi-square statistic.",
     ["Build the contingency table.",
      "Compute chi-square against independence.",
      "Report V = sqrt(chi2 / (n * (min(r, c) - 1)))."]),
    ("elift", "cat_cat", "correlation",
     "Measure discrimination between two categorical features as the worst-case "
     "lift of outcome given group.",
     ["Compute P(y|x) / P(y) per supported cell.",
      "Report the largest of the lift and its reciprocal."]),
    ("statistical_parity", "cat_cat", "correlation",
     "Measure outcome-rate differences between groups with statistical parity "
     "gaps and pooled z-scores.",
     ["Compute outcome rates per group.",
      "Report the largest pairwise gap and its z-score."]),
    ("lipschitz", "cat_cat", "correlation",
     "Measure distribution loss differences between groups as the Lipschitz "
     "constant of the group-to-conditional-distribution map.",
     ["Compute conditional outcome distributions per group.",
      "Report the largest pairwise total variation distance."]),
    ("total_variation", "cat_cat", "correlation",
     "Measure divergence of group-specific outcome distributions from the "
     "overall distribution with total variation distance.",
     ["Compute the overall outcome distribution.",
      "Report the largest group-vs-overall TVD."]),
    ("max_abs_mean", "cat_num", "correlation",
     "Measure group effects on a numerical outcome via the maximum absolute "
     "standardized group mean (N value).",
     ["Standardize the outcome globally.",
      "Report the largest |group mean|."]),
    ("cohens_d", "cat_num", "correlation",
     "Measure effect size between groups on a numerical outcome with Cohen's d "
     "from the independent t-test convention.",
     ["Compute pairwise mean gaps.",
      "Scale by the pooled sample sd and report the largest |d|."]),
    ("standardized_difference", "cat_num", "correlation",
     "Measure group mean differences on a numerical outcome scaled robustly by "
     "1.4826 times the MAD.",
     ["Compute pairwise mean gaps.",
      "Scale by 1.4826 * MAD of all outcomes."]),
    ("causal_effect", "cat_num", "correlation",
     "Estimate the average causal effect of a categorical treatment on a "
     "numerical outcome, optionally stratified on a covariate.",
     ["Binarize to the two largest categories.",
      "Report the (stratum-weighted) mean difference and its sd-scaled form."]),
    ("pse", "cat_num", "correlation",
     "Decompose a treatment effect into direct and indirect paths with linear "
     "mediation (ADE, AIE, path-specific effect).",
     ["Fit m = a0 + a1 t and y = b0 + b1 t + b2 m by least squares.",
      "Report ADE = b1, AIE = a1 * b2, and max(|ADE|, |AIE|) / sd(y)."]),
    ("pearson", "num_num", "correlation",
     "Measure linear association between two numerical features with the Pearson "
     "correlation coefficient.",
     ["Compute centered cross- and self-products.",
      "Report r in [-1, 1]."]),
    ("nmi", "num_num", "correlation",
     "Measure dependence between two numerical features with normalized mutual "
     "information over equal-frequency bins.",
     ["Discretize both features into quantile bins.",
      "Report I(X;Y) / sqrt(H(X) H(Y))."]),
    ("hgr_approximation", "num_num", "correlation",
     "Approximate the Hirschfeld-Gebelein-Renyi maximal correlation from the "
     "KDE-smoothed joint distribution, with the chi-square divergence.",
     ["Smooth the joint density on a lattice and bin it.",
      "Report the second singular value of the normalized joint matrix."]),
    ("wasserstein", "num_num", "correlation",
     "Compare the distributions of two numerical features with the Wasserstein-2 "
     "distance of their standardized samples.",
     ["Standardize and sort both samples.",
      "Report the root mean squared quantile gap."]),
    ("hsic", "num_num", "correlation",
     "Measure nonlinear dependence between two numerical features with the "
     "Hilbert-Schmidt independence criterion using RBF kernels.",
     ["Form RBF Gram matrices with median-heuristic bandwidths.",
      "Report the normalized HSIC in [0, 1]."]),
]


def main():
    entries = list(SEED)
    for i, (metric_id, data_type, bias_type, intention, steps) in enumerate(BUILTINS, 1):
        entries.append({
            "id": f"B-{data_type}-{metric_id}",
            "intention": intention,
            "method": {f"step_{j}": s for j, s in enumerate(steps, 1)},
            "title": f"Built-in detection tool: {metric_id}",
            "article_link": "",
            "field": "General",
            "year": 2025,
            "tags": {"bias_type": bias_type, "data_type": data_type,
                     "domain": "general"},
        })
    OUT.write_text(json.dumps(entries, indent=2, ensure_ascii=False) + "\n",
                   encoding="utf-8")
    print(f"wrote {OUT} ({len(entries)} entries)")


if __name__ == "__main__":
    main()
