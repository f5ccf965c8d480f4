#pragma once

#include <array>
#include <string>
#include <vector>

#include "pricesim/engine.hpp"

namespace pricesim {

struct ScoreRow {
    std::string competitor;
    double mean_x_bar = 0.0;
    double mean_y_bar = 0.0;
    double mean_final = 0.0;
    int rank = 0;
};

struct ExtremesRow {
    std::string competitor;
    double price_low = 0.0, price_high = 0.0;
    double sales_low = 0.0, sales_high = 0.0;
    double revenue_low = 0.0, revenue_high = 0.0;
};

struct PriceSummaryRow {
    std::string competitor;
    double mean = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, cov = 0.0;
};

struct SegmentRow {
    std::string competitor;
    double sales_sho = 0.0, sales_loy = 0.0, sales_sci = 0.0;        // mean per period
    double rev_per_sho = 0.0, rev_per_loy = 0.0, rev_per_sci = 0.0;  // per expected arrival
};

struct ThetaBucketTable {
    // rows: 10 buckets of width 0.1; columns: per-competitor means; count of
    // simulations that landed in the bucket
    std::array<std::vector<double>, 10> values;
    std::array<long, 10> sim_count{};
};

struct PairwiseTable {
    std::vector<std::vector<double>> cell;  // [row][col], diagonal unused
};

struct ReportBundle {
    std::vector<std::string> roster;
    int simulations = 0;
    std::vector<ScoreRow> scores;
    PairwiseTable duopoly_mean_revenue;  // mean revenue per period, row vs col
    PairwiseTable duopoly_mean_price;    // mean price posted, row vs col
    PairwiseTable duopoly_price_cov;     // coefficient of variation
    std::vector<ExtremesRow> extremes;   // oligopoly low/high fractions, ties double-counted
    std::vector<PriceSummaryRow> oligopoly_prices;
    std::vector<SegmentRow> segments;
    ThetaBucketTable revenue_by_theta_loy;  // oligopoly revenue per period
    ThetaBucketTable price_by_theta_loy;    // oligopoly mean price
    ThetaBucketTable revenue_by_theta_sci;
    bool has_period_detail = false;  // false when built from revenue-only traces
};

// Streaming accumulation over simulations; memory stays bounded except for
// the oligopoly price quantile samples, which thin deterministically past a
// cap. Share computations here are an independent reimplementation of the
// scoring formula, used to cross-check the engine.
class ReportAccumulator {
public:
    explicit ReportAccumulator(std::vector<std::string> roster);

    void add(const SimulationResult& sim);

    ReportBundle finish() const;

private:
    struct Moments {
        double sum = 0.0, sum_sq = 0.0;
        long count = 0;
    };

    std::vector<std::string> roster_;
    std::size_t m_;
    long sims_ = 0;
    long detail_sims_ = 0;

    std::vector<double> sum_x_bar_, sum_y_bar_, sum_final_;
    std::vector<std::vector<double>> duo_revenue_sum_;
    std::vector<std::vector<long>> duo_periods_;
    std::vector<std::vector<Moments>> duo_price_;

    std::vector<double> low_price_, high_price_, low_sales_, high_sales_, low_rev_, high_rev_;
    long oli_periods_ = 0;

    std::vector<Moments> oli_price_moments_;
    std::vector<std::vector<double>> oli_price_samples_;
    std::vector<int> sample_stride_;
    std::vector<long> sample_seen_;

    std::vector<double> seg_sales_sho_, seg_sales_loy_, seg_sales_sci_;
    std::vector<double> seg_rev_sho_, seg_rev_loy_, seg_rev_sci_;
    double expected_sho_ = 0.0, expected_loy_ = 0.0, expected_sci_ = 0.0;

    struct BucketAccum {
        std::vector<double> value_sum;
        long periods = 0;
        long sims = 0;
    };
    std::array<BucketAccum, 10> rev_by_loy_, price_by_loy_, rev_by_sci_;
};

ReportBundle build_report(const std::vector<SimulationResult>& sims,
                          std::vector<std::string> roster);

// Reads every sim_*.jsonl under dir; truncated files are skipped with a note
// to stderr. Throws on an empty directory.
ReportBundle build_report_from_dir(const std::string& dir);

void write_report_csv(const ReportBundle& report, const std::string& out_dir);

}  // namespace pricesim
