#include <chrono>
#include <iostream>

#include "CLI11.hpp"
#include "opo/embedding.hpp"
#include "opo/vindex.hpp"

// Compares the OpenMP-parallel flat scan against the serial reference on a
// synthetic index and verifies they agree hit-for-hit.
int main(int argc, char** argv) {
    CLI::App app{"Flat-scan benchmark: serial reference vs OpenMP"};
    std::size_t n = 100000, dim = 64, queries = 50, k = 10;
    app.add_option("-n,--entries", n, "Index size");
    app.add_option("-d,--dim", dim, "Vector dimension");
    app.add_option("-q,--queries", queries, "Number of queries");
    app.add_option("-k", k, "Neighbors per query");
    CLI11_PARSE(app, argc, argv);

    opo::DeterministicProvider provider(dim, "bench");
    opo::VectorIndex ix(dim);
    for (std::size_t i = 0; i < n; ++i)
        ix.add("r" + std::to_string(i), provider.embed("entry " + std::to_string(i)), "all");
    ix.seal();

    std::vector<opo::EmbeddingVector> qs;
    for (std::size_t i = 0; i < queries; ++i) qs.push_back(provider.embed("query " + std::to_string(i)));

    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    std::vector<std::vector<opo::SearchHit>> serial;
    for (const auto& q : qs) serial.push_back(ix.search_serial(q, k));
    auto t1 = clock::now();
    std::vector<std::vector<opo::SearchHit>> parallel;
    for (const auto& q : qs) parallel.push_back(ix.search(q, k));
    auto t2 = clock::now();

    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < queries; ++i)
        for (std::size_t j = 0; j < serial[i].size(); ++j)
            if (serial[i][j].rule_id != parallel[i][j].rule_id ||
                serial[i][j].score != parallel[i][j].score)
                ++mismatches;

    auto ms = [](auto a, auto b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };
    double serial_ms = ms(t0, t1), parallel_ms = ms(t1, t2);
    std::cout << "entries=" << n << " dim=" << dim << " queries=" << queries << " k=" << k << '\n'
              << "serial:   " << serial_ms << " ms total, " << serial_ms / queries << " ms/query\n"
              << "parallel: " << parallel_ms << " ms total, " << parallel_ms / queries
              << " ms/query\n"
              << "speedup:  " << serial_ms / parallel_ms << "x\n"
              << "mismatches: " << mismatches << '\n';
    return mismatches == 0 ? 0 : 1;
}
