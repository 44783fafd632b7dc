#pragma once

// Categorical effect modelling of the per-utterance women's-name share:
// treatment-coded designs, least squares, one-way ANOVA with F-test p-values
// and eta-squared effect sizes.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wre/align.hpp"
#include "wre/core.hpp"

namespace wre::stats {

using align::AnalysisRow;
using align::Factor;

enum class StatsErrorKind { SingleLevelFactor, ZeroVariance, RankDeficient, InsufficientData };
std::string_view to_string(StatsErrorKind k);

class StatsError : public Error {
public:
    StatsError(StatsErrorKind kind, const std::string& detail);
    StatsErrorKind kind() const noexcept { return kind_; }

private:
    StatsErrorKind kind_;
};

// --- Special functions -------------------------------------------------------

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1],
/// evaluated by continued fraction.
double regularized_incomplete_beta(double x, double a, double b);

/// P(F > f) for an F(df1, df2) variate.
double f_upper_tail(double f, double df1, double df2);

// --- Neumaier compensated summation ------------------------------------------

class CompensatedSum {
public:
    void add(double v);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

// --- Least squares -------------------------------------------------------------

struct Design {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> columns;  // "intercept", then "<factor>[<level>]"
    std::vector<std::string> levels;   // sorted; levels.front() is the reference
};

/// Intercept plus one indicator per non-reference level. The reference level
/// is the lexicographically smallest.
Design build_design(std::span<const AnalysisRow> rows, Factor factor);

struct OlsFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    double rss = 0.0;
};

/// Least squares through column-pivoting Householder QR.
OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// --- ANOVA -------------------------------------------------------------------

struct LevelSummary {
    std::string level;
    double n = 0.0;  // row count, or total weight when weighted
    double mean = 0.0;
};

struct AnovaResult {
    std::string factor;
    double ss_effect = 0.0;
    double ss_residual = 0.0;
    double ss_total = 0.0;
    double df_effect = 0.0;
    double df_residual = 0.0;
    double f_stat = 0.0;
    double p_value = 1.0;
    double eta_squared = 0.0;
    std::vector<LevelSummary> levels;
};

/// One-way decomposition of `y` by `labels`. Optional `weights` act as
/// frequency weights (df_residual = total weight - number of levels).
AnovaResult one_way_anova(std::span<const double> y, std::span<const std::string> labels,
                          std::span<const double> weights = {});

enum class RowWeighting { Unweighted, HitCount };

AnovaResult one_way_anova(std::span<const AnalysisRow> rows, Factor factor,
                          RowWeighting weighting = RowWeighting::Unweighted);

// --- Effect report -------------------------------------------------------------

enum class EffectTier { None, Small, Medium, Large };
std::string_view to_string(EffectTier t);
/// none < 0.01 <= small < 0.06 <= medium < 0.14 <= large.
EffectTier effect_tier(double eta_squared);

struct FactorEffect {
    Factor factor;
    std::optional<AnovaResult> anova;
    std::string skipped;  // reason when `anova` is empty
    bool significant = false;
    EffectTier tier = EffectTier::None;
};

struct JointFit {
    std::vector<std::string> columns;  // columns kept in the fit
    std::vector<std::string> aliased;  // columns dropped as linear combinations of earlier ones
    Eigen::VectorXd coefficients;
    double rss = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

struct EffectReport {
    std::size_t n = 0;
    std::vector<FactorEffect> factors;
    std::optional<JointFit> joint;
};

struct EffectOptions {
    double alpha = 0.05;
    RowWeighting weighting = RowWeighting::Unweighted;
};

/// One-way ANOVA per factor plus an additive least-squares fit over all factors.
EffectReport effect_report(std::span<const AnalysisRow> rows, const EffectOptions& options = {});

// --- Row exchange ------------------------------------------------------------

/// Comma-separated: y, then the seven factors in kAllFactors order.
void write_rows(std::ostream& out, std::span<const AnalysisRow> rows);
std::vector<AnalysisRow> read_rows(std::istream& in, std::string_view source = "rows");

}  // namespace wre::stats
