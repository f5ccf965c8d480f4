#pragma once

#include <span>
#include <vector>

namespace pricesim {

// A competitor's learned demand model (distinct from the market ground
// truth): a probability distribution over per-period arrival counts, with a
// linear-utility logit (utility a - b*p) per arrival-count component.
struct MixtureComponent {
    double arrivals = 0.0;  // representative arrival count of the component
    double weight = 0.0;
    double a = 0.0;
    double b = 0.0;
};

struct MixtureLogitModel {
    std::vector<MixtureComponent> components;
    long arrival_bound = 0;
    bool valid = false;
    bool converged = false;

    // expected own demand for one full price vector
    double expected_demand(std::span<const double> prices, int own_index) const;
};

// EM fit over T periods of full price rows and the observer's own sales.
// Components are arrival counts 0..bound, collapsed to at most max_components
// evenly spaced groups. Warm-starts from `previous` when the component layout
// matches.
MixtureLogitModel fit_mixture_em(const std::vector<std::vector<double>>& price_rows,
                                 std::span<const double> own_sales, int own_index, long arrival_bound,
                                 int max_components, int max_iters, double tol,
                                 const MixtureLogitModel* previous = nullptr);

}  // namespace pricesim
