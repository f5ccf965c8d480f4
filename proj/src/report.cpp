#include "pricesim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "pricesim/stats.hpp"
#include "pricesim/trace.hpp"

namespace pricesim {

namespace {

constexpr long kQuantileSampleCap = 200000;

int theta_bucket(double theta) {
    const int b = static_cast<int>(theta * 10.0);
    return std::clamp(b, 0, 9);
}

}  // namespace

ReportAccumulator::ReportAccumulator(std::vector<std::string> roster)
    : roster_(std::move(roster)), m_(roster_.size()) {
    sum_x_bar_.assign(m_, 0.0);
    sum_y_bar_.assign(m_, 0.0);
    sum_final_.assign(m_, 0.0);
    duo_revenue_sum_.assign(m_, std::vector<double>(m_, 0.0));
    duo_periods_.assign(m_, std::vector<long>(m_, 0));
    duo_price_.assign(m_, std::vector<Moments>(m_));
    low_price_.assign(m_, 0.0);
    high_price_.assign(m_, 0.0);
    low_sales_.assign(m_, 0.0);
    high_sales_.assign(m_, 0.0);
    low_rev_.assign(m_, 0.0);
    high_rev_.assign(m_, 0.0);
    oli_price_moments_.assign(m_, Moments{});
    oli_price_samples_.assign(m_, {});
    sample_stride_.assign(m_, 1);
    sample_seen_.assign(m_, 0);
    seg_sales_sho_.assign(m_, 0.0);
    seg_sales_loy_.assign(m_, 0.0);
    seg_sales_sci_.assign(m_, 0.0);
    seg_rev_sho_.assign(m_, 0.0);
    seg_rev_loy_.assign(m_, 0.0);
    seg_rev_sci_.assign(m_, 0.0);
    for (auto* table : {&rev_by_loy_, &price_by_loy_, &rev_by_sci_})
        for (auto& bucket : *table) bucket.value_sum.assign(m_, 0.0);
}

void ReportAccumulator::add(const SimulationResult& sim) {
    if (sim.oligopoly.cumulative_revenue.size() != m_)
        throw std::invalid_argument("report: simulation roster size mismatch");
    ++sims_;

    // Revenue shares recomputed from raw revenues (independent of the
    // engine's scorecard).
    const auto& x = sim.oligopoly.cumulative_revenue;
    const double x_total = std::accumulate(x.begin(), x.end(), 0.0);
    std::vector<double> y_row(m_, 0.0);
    double y_total = 0.0;
    for (const auto& duo : sim.duopolies) {
        y_row[duo.id.a] += duo.cumulative_revenue[0];
        y_row[duo.id.b] += duo.cumulative_revenue[1];
        y_total += duo.cumulative_revenue[0] + duo.cumulative_revenue[1];
    }
    for (std::size_t j = 0; j < m_; ++j) {
        const double xb = x_total > 0.0 ? x[j] / x_total : 1.0 / m_;
        const double yb = y_total > 0.0 ? y_row[j] / y_total : 1.0 / m_;
        sum_x_bar_[j] += xb;
        sum_y_bar_[j] += yb;
        sum_final_[j] += 0.5 * (xb + yb);
    }

    for (const auto& duo : sim.duopolies) {
        const int a = duo.id.a;
        const int b = duo.id.b;
        duo_revenue_sum_[a][b] += duo.cumulative_revenue[0];
        duo_revenue_sum_[b][a] += duo.cumulative_revenue[1];
        duo_periods_[a][b] += duo.periods();
        duo_periods_[b][a] += duo.periods();
        for (const auto& row : duo.prices) {
            auto& ab = duo_price_[a][b];
            ab.sum += row[0];
            ab.sum_sq += row[0] * row[0];
            ab.count++;
            auto& ba = duo_price_[b][a];
            ba.sum += row[1];
            ba.sum_sq += row[1] * row[1];
            ba.count++;
        }
    }

    // Revenue-only traces carry no per-period records; every table past this
    // point needs them.
    const bool detail = !sim.oligopoly.prices.empty();
    if (!detail) return;
    ++detail_sims_;

    const auto& oli = sim.oligopoly;
    oli_periods_ += oli.periods();
    const int loy_bucket = theta_bucket(sim.params.theta_loy);
    const int sci_bucket = theta_bucket(sim.params.theta_sci);
    for (auto* entry : {&rev_by_loy_[loy_bucket], &price_by_loy_[loy_bucket],
                        &rev_by_sci_[sci_bucket]}) {
        entry->periods += oli.periods();
        entry->sims += 1;
    }

    for (int t = 0; t < oli.periods(); ++t) {
        const auto& prices = oli.prices[t];
        const auto& outcome = oli.outcomes[t].per_competitor;

        const double pmin = *std::min_element(prices.begin(), prices.end());
        const double pmax = *std::max_element(prices.begin(), prices.end());
        long smin = outcome[0].total_sales(), smax = smin;
        double rmin = outcome[0].revenue, rmax = rmin;
        for (std::size_t k = 1; k < m_; ++k) {
            smin = std::min(smin, outcome[k].total_sales());
            smax = std::max(smax, outcome[k].total_sales());
            rmin = std::min(rmin, outcome[k].revenue);
            rmax = std::max(rmax, outcome[k].revenue);
        }

        for (std::size_t k = 0; k < m_; ++k) {
            if (prices[k] == pmin) low_price_[k] += 1.0;
            if (prices[k] == pmax) high_price_[k] += 1.0;
            if (outcome[k].total_sales() == smin) low_sales_[k] += 1.0;
            if (outcome[k].total_sales() == smax) high_sales_[k] += 1.0;
            if (outcome[k].revenue == rmin) low_rev_[k] += 1.0;
            if (outcome[k].revenue == rmax) high_rev_[k] += 1.0;

            auto& pm = oli_price_moments_[k];
            pm.sum += prices[k];
            pm.sum_sq += prices[k] * prices[k];
            pm.count++;

            // deterministic strided thinning keeps quantile samples bounded
            if (sample_seen_[k] % sample_stride_[k] == 0) {
                auto& samples = oli_price_samples_[k];
                if (static_cast<long>(samples.size()) >= kQuantileSampleCap) {
                    std::vector<double> thinned;
                    thinned.reserve(samples.size() / 2 + 1);
                    for (std::size_t i = 0; i < samples.size(); i += 2) thinned.push_back(samples[i]);
                    samples = std::move(thinned);
                    sample_stride_[k] *= 2;
                }
                if (sample_seen_[k] % sample_stride_[k] == 0) samples.push_back(prices[k]);
            }
            sample_seen_[k]++;

            seg_sales_sho_[k] += outcome[k].sales_sho;
            seg_sales_loy_[k] += outcome[k].sales_loy;
            seg_sales_sci_[k] += outcome[k].sales_sci;
            seg_rev_sho_[k] += prices[k] * outcome[k].sales_sho;
            seg_rev_loy_[k] += prices[k] * outcome[k].sales_loy;
            seg_rev_sci_[k] += prices[k] * outcome[k].sales_sci;

            rev_by_loy_[loy_bucket].value_sum[k] += outcome[k].revenue;
            price_by_loy_[loy_bucket].value_sum[k] += prices[k];
            rev_by_sci_[sci_bucket].value_sum[k] += outcome[k].revenue;
        }
    }

    const double periods = static_cast<double>(oli.periods());
    expected_sho_ += sim.params.lambda * sim.params.theta_sho * periods;
    expected_loy_ += sim.params.lambda * sim.params.theta_loy * periods;
    expected_sci_ += sim.params.lambda * sim.params.theta_sci * periods;
}

ReportBundle ReportAccumulator::finish() const {
    ReportBundle out;
    out.roster = roster_;
    out.simulations = static_cast<int>(sims_);
    out.has_period_detail = detail_sims_ > 0;
    if (sims_ == 0) return out;

    std::vector<std::size_t> order(m_);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return sum_final_[a] > sum_final_[b]; });
    std::vector<int> rank(m_, 0);
    for (std::size_t i = 0; i < m_; ++i) rank[order[i]] = static_cast<int>(i) + 1;
    for (std::size_t j = 0; j < m_; ++j)
        out.scores.push_back({roster_[j], sum_x_bar_[j] / sims_, sum_y_bar_[j] / sims_,
                              sum_final_[j] / sims_, rank[j]});

    out.duopoly_mean_revenue.cell.assign(m_, std::vector<double>(m_, 0.0));
    out.duopoly_mean_price.cell.assign(m_, std::vector<double>(m_, 0.0));
    out.duopoly_price_cov.cell.assign(m_, std::vector<double>(m_, 0.0));
    for (std::size_t a = 0; a < m_; ++a) {
        for (std::size_t b = 0; b < m_; ++b) {
            if (a == b) continue;
            if (duo_periods_[a][b] > 0)
                out.duopoly_mean_revenue.cell[a][b] = duo_revenue_sum_[a][b] / duo_periods_[a][b];
            const auto& mom = duo_price_[a][b];
            if (mom.count > 0) {
                const double mean = mom.sum / mom.count;
                const double var = std::max(0.0, mom.sum_sq / mom.count - mean * mean);
                out.duopoly_mean_price.cell[a][b] = mean;
                out.duopoly_price_cov.cell[a][b] = mean > 1e-12 ? std::sqrt(var) / mean : 0.0;
            }
        }
    }

    if (oli_periods_ > 0) {
        const double periods = static_cast<double>(oli_periods_);
        for (std::size_t k = 0; k < m_; ++k) {
            out.extremes.push_back({roster_[k], low_price_[k] / periods, high_price_[k] / periods,
                                    low_sales_[k] / periods, high_sales_[k] / periods,
                                    low_rev_[k] / periods, high_rev_[k] / periods});

            PriceSummaryRow row;
            row.competitor = roster_[k];
            const auto& mom = oli_price_moments_[k];
            row.mean = mom.sum / mom.count;
            const double var = std::max(0.0, mom.sum_sq / mom.count - row.mean * row.mean);
            row.cov = row.mean > 1e-12 ? std::sqrt(var) / row.mean : 0.0;
            auto samples = oli_price_samples_[k];
            row.q25 = quantile_interp(samples, 0.25);
            row.median = quantile_interp(samples, 0.50);
            row.q75 = quantile_interp(samples, 0.75);
            out.oligopoly_prices.push_back(row);

            SegmentRow seg;
            seg.competitor = roster_[k];
            seg.sales_sho = seg_sales_sho_[k] / periods;
            seg.sales_loy = seg_sales_loy_[k] / periods;
            seg.sales_sci = seg_sales_sci_[k] / periods;
            seg.rev_per_sho = expected_sho_ > 0.0 ? seg_rev_sho_[k] / expected_sho_ : 0.0;
            seg.rev_per_loy = expected_loy_ > 0.0 ? seg_rev_loy_[k] / expected_loy_ : 0.0;
            seg.rev_per_sci = expected_sci_ > 0.0 ? seg_rev_sci_[k] / expected_sci_ : 0.0;
            out.segments.push_back(seg);
        }
    }

    const auto fill_table = [&](const std::array<BucketAccum, 10>& in, ThetaBucketTable& table) {
        for (int b = 0; b < 10; ++b) {
            table.sim_count[b] = in[b].sims;
            table.values[b].assign(m_, 0.0);
            if (in[b].periods > 0)
                for (std::size_t k = 0; k < m_; ++k)
                    table.values[b][k] = in[b].value_sum[k] / in[b].periods;
        }
    };
    fill_table(rev_by_loy_, out.revenue_by_theta_loy);
    fill_table(price_by_loy_, out.price_by_theta_loy);
    fill_table(rev_by_sci_, out.revenue_by_theta_sci);
    return out;
}

ReportBundle build_report(const std::vector<SimulationResult>& sims,
                          std::vector<std::string> roster) {
    if (sims.empty()) throw std::invalid_argument("build_report: no simulations");
    ReportAccumulator acc(std::move(roster));
    for (const auto& sim : sims) acc.add(sim);
    return acc.finish();
}

ReportBundle build_report_from_dir(const std::string& dir) {
    const auto files = list_simulation_files(dir);
    if (files.empty())
        throw std::runtime_error("no simulation traces found in '" + dir + "'");
    auto roster = manifest_roster(dir);

    std::optional<ReportAccumulator> acc;
    long skipped = 0;
    for (const auto& file : files) {
        auto sim = read_simulation_file(file);
        if (!sim) {
            ++skipped;
            std::cerr << "report: skipping unreadable or truncated trace " << file << "\n";
            continue;
        }
        if (!acc) {
            if (roster.empty())
                roster.assign(sim->oligopoly.cumulative_revenue.size(), "");
            for (std::size_t k = 0; k < roster.size(); ++k)
                if (roster[k].empty()) roster[k] = "competitor_" + std::to_string(k);
            acc.emplace(roster);
        }
        acc->add(*sim);
    }
    if (!acc) throw std::runtime_error("no readable simulation traces in '" + dir + "'");
    return acc->finish();
}

namespace {

void write_csv(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report file " + path);
    out << content;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string pairwise_csv(const std::vector<std::string>& roster, const PairwiseTable& table) {
    std::string s = "competitor";
    for (const auto& id : roster) s += "," + id;
    s += "\n";
    for (std::size_t a = 0; a < roster.size(); ++a) {
        s += roster[a];
        for (std::size_t b = 0; b < roster.size(); ++b)
            s += "," + (a == b ? std::string() : fmt(table.cell[a][b]));
        s += "\n";
    }
    return s;
}

std::string theta_csv(const std::vector<std::string>& roster, const ThetaBucketTable& table) {
    std::string s = "bucket_lo,bucket_hi,simulations";
    for (const auto& id : roster) s += "," + id;
    s += "\n";
    for (int b = 0; b < 10; ++b) {
        s += fmt(b / 10.0) + "," + fmt((b + 1) / 10.0) + "," + std::to_string(table.sim_count[b]);
        for (std::size_t k = 0; k < roster.size(); ++k) s += "," + fmt(table.values[b][k]);
        s += "\n";
    }
    return s;
}

}  // namespace

void write_report_csv(const ReportBundle& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    {
        std::string s = "competitor,mean_x_bar,mean_y_bar,mean_final,rank\n";
        for (const auto& row : report.scores)
            s += row.competitor + "," + fmt(row.mean_x_bar) + "," + fmt(row.mean_y_bar) + "," +
                 fmt(row.mean_final) + "," + std::to_string(row.rank) + "\n";
        write_csv(path("scores.csv"), s);
    }
    write_csv(path("duopoly_revenue_matrix.csv"),
              pairwise_csv(report.roster, report.duopoly_mean_revenue));
    write_csv(path("duopoly_price_matrix.csv"),
              pairwise_csv(report.roster, report.duopoly_mean_price));
    write_csv(path("duopoly_price_cov_matrix.csv"),
              pairwise_csv(report.roster, report.duopoly_price_cov));

    if (report.has_period_detail) {
        {
            std::string s =
                "competitor,price_low,price_high,sales_low,sales_high,revenue_low,revenue_high\n";
            for (const auto& r : report.extremes)
                s += r.competitor + "," + fmt(r.price_low) + "," + fmt(r.price_high) + "," +
                     fmt(r.sales_low) + "," + fmt(r.sales_high) + "," + fmt(r.revenue_low) + "," +
                     fmt(r.revenue_high) + "\n";
            write_csv(path("extremes.csv"), s);
        }
        {
            std::string s = "competitor,mean,q25,median,q75,cov\n";
            for (const auto& r : report.oligopoly_prices)
                s += r.competitor + "," + fmt(r.mean) + "," + fmt(r.q25) + "," + fmt(r.median) +
                     "," + fmt(r.q75) + "," + fmt(r.cov) + "\n";
            write_csv(path("oligopoly_prices.csv"), s);
        }
        {
            std::string s =
                "competitor,sales_sho,sales_loy,sales_sci,rev_per_sho,rev_per_loy,rev_per_sci\n";
            for (const auto& r : report.segments)
                s += r.competitor + "," + fmt(r.sales_sho) + "," + fmt(r.sales_loy) + "," +
                     fmt(r.sales_sci) + "," + fmt(r.rev_per_sho) + "," + fmt(r.rev_per_loy) + "," +
                     fmt(r.rev_per_sci) + "\n";
            write_csv(path("segments.csv"), s);
        }
        write_csv(path("revenue_by_theta_loy.csv"),
                  theta_csv(report.roster, report.revenue_by_theta_loy));
        write_csv(path("price_by_theta_loy.csv"),
                  theta_csv(report.roster, report.price_by_theta_loy));
        write_csv(path("revenue_by_theta_sci.csv"),
                  theta_csv(report.roster, report.revenue_by_theta_sci));
    }
}

}  // namespace pricesim
