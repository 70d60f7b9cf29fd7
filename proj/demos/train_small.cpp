// Minimal end-to-end run: synthesize data, train briefly, print the metrics
// trail and where the generator ended up.

#include <cstdio>

#include "pqcgan/pqcgan.hpp"

int main() {
    using namespace pqcgan;

    TrainingConfig config;
    config.epochs = 40;
    config.eval_every = 5;

    const ImageDataset data = make_dataset(config.dataset);
    const RunResult run = train(config, data);

    std::printf("%s\n", metrics_csv_header());
    for (const MetricsRecord& r : run.history) std::printf("%s\n", metrics_csv_row(r).c_str());

    const GeneratedOutput out = generate(run.generator, config.noise, EvalMode::exact());
    std::printf("\nvariant weights:");
    for (double w : out.weights.probs) std::printf(" %.4f", w);
    std::printf("\nmean image:     ");
    for (double p : out.mean_image.probs) std::printf(" %.4f", p);
    std::printf("\ndataset mean:   ");
    for (double p : dataset_mean(data).probs) std::printf(" %.4f", p);
    std::printf("\n");
    return 0;
}
