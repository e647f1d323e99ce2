#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include <algorithm>

// End-to-end checks against the built binary.

namespace {

namespace fs = std::filesystem;

const std::string kCli = NANONMR_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

RunResult run_cli(const std::string& args)
{
    const fs::path out = fs::temp_directory_path() / "nanonmr_cli_stdout.txt";
    const std::string cmd = kCli + " " + args + " > " + out.string() + " 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(rc);
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    r.stdout_text = ss.str();
    fs::remove(out);
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("envelope command emits the requested rows")
{
    const RunResult r = run_cli("envelope --kind exp --z 0:1:2");
    CHECK(r.exit_code == 0);
    // rows (0, 1) and (1, e^-1)
    CHECK(r.stdout_text.find("z,C\n0,1\n1,0.36787944117144233\n") != std::string::npos);

    const RunResult p = run_cli("envelope --kind power-law --z 0:0:1");
    CHECK(p.exit_code == 0);
    CHECK(p.stdout_text.find("0,1\n") != std::string::npos);
}

TEST_CASE("fisher command and exit codes")
{
    const RunResult ok = run_cli(
        "fisher --protocol qdyne --method quadrature --f-delta 100Hz --t-d 100us "
        "--tau 10us --tau-o 15us --total-time 1h");
    CHECK(ok.exit_code == 0);
    CHECK(ok.stdout_text.find("\"value_s2\"") != std::string::npos);

    // usage error: unknown method
    const RunResult bad = run_cli("fisher --method nonsense");
    CHECK(bad.exit_code == 1);

    // domain error: closed powerlaw with delta T <= 1
    const RunResult dom = run_cli(
        "fisher --protocol qdyne --method closed-powerlaw --f-delta 0.0001Hz "
        "--total-time 1s");
    CHECK(dom.exit_code == 1);
}

TEST_CASE("determinism: identical invocations are byte-identical")
{
    const std::string args =
        "simulate --protocol qdyne --n 2000 --seed 99 --f-delta 4kHz --t-d 100us "
        "--tau 10us --tau-o 15us --phi-rms 0.4 --eta0 0.5 --eta1 0.25";
    const fs::path t1 = fs::temp_directory_path() / "nanonmr_cli_t1.txt";
    const fs::path t2 = fs::temp_directory_path() / "nanonmr_cli_t2.txt";
    CHECK(run_cli(args + " --out " + t1.string()).exit_code == 0);
    CHECK(run_cli(args + " --out " + t2.string()).exit_code == 0);
    CHECK(slurp(t1) == slurp(t2));
    CHECK(!slurp(t1).empty());
    fs::remove(t1);
    fs::remove(t2);
}

TEST_CASE("unit equivalence: us vs ms spellings")
{
    const std::string base =
        "fisher --protocol cs --method quadrature --f-delta 250Hz --phi-rms 0.8 "
        "--total-time 30min ";
    const RunResult a = run_cli(base + "--t-d 100us --tau 10us");
    const RunResult b = run_cli(base + "--t-d 0.1ms --tau 0.01ms");
    CHECK(a.exit_code == 0);
    CHECK(a.stdout_text == b.stdout_text);
}

TEST_CASE("ratio-map 1x1 equals fisher calls and reruns identically")
{
    const std::string args =
        "ratio-map --x-axis delta --x-range 100Hz:100Hz:1 --y-axis total-time "
        "--y-range 1h:1h:1 --t-d 100us --tau 10us --tau-o 15us";
    const RunResult r1 = run_cli(args);
    const RunResult r2 = run_cli(args);
    CHECK(r1.exit_code == 0);
    CHECK(r1.stdout_text == r2.stdout_text);
    CHECK(r1.stdout_text.rfind("x,y,R_delta,I_cs,I_qd,resolvable_cs,resolvable_qd\n", 0)
          == 0);
    // exactly one data row
    CHECK(std::count(r1.stdout_text.begin(), r1.stdout_text.end(), '\n') == 2);
}

TEST_CASE("undersample command reproduces the k = 111 case")
{
    const RunResult r =
        run_cli("undersample --f-larmor 2MHz --f-target 2kHz --n-samples 10");
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("\"k\": 111") != std::string::npos);
}

TEST_CASE("ingest boundary rule via CLI")
{
    const fs::path tags = fs::temp_directory_path() / "nanonmr_cli_tags.txt";
    {
        std::ofstream out(tags);
        out << "# tags\n100\n499\n500\n1100\n";
    }
    const fs::path trace = fs::temp_directory_path() / "nanonmr_cli_ingested.txt";
    const RunResult r = run_cli("ingest --timetags " + tags.string()
                                + " --tau-tilde 1us --window-offset 0s --window-length "
                                  "0.5us --n 2 --out "
                                + trace.string());
    CHECK(r.exit_code == 0);
    const std::string body = slurp(trace);
    // counts: measurement 0 sees tags 100,499 (500 excluded); measurement 1
    // sees 1100
    CHECK(body.find("\n2\n1\n") != std::string::npos);
    fs::remove(tags);
    fs::remove(trace);
}

TEST_CASE("numeric failures exit with code 2")
{
    // malformed trace file: header missing -> runtime error
    const fs::path bad = fs::temp_directory_path() / "nanonmr_cli_bad_trace.txt";
    {
        std::ofstream out(bad);
        out << "0\n1\n0\n";
    }
    const RunResult r = run_cli("estimate --trace " + bad.string() + " --max-lag 1ms");
    CHECK(r.exit_code == 2);
    fs::remove(bad);
}

TEST_CASE("cs sweep via CLI")
{
    const fs::path out = fs::temp_directory_path() / "nanonmr_cli_sweep.csv";
    const RunResult r = run_cli(
        "simulate --protocol cs --tau 10us --tau-w 0us:200us:5 --n-repeats 200 "
        "--seed 3 --phi-rms 0.2 --f-delta 1kHz --t-d 100us --out "
        + out.string());
    CHECK(r.exit_code == 0);
    const std::string body = slurp(out);
    CHECK(body.rfind("tau_w_s,mean_contrast\n", 0) == 0);
    CHECK(std::count(body.begin(), body.end(), '\n') == 6);  // header + 5 rows
    fs::remove(out);
}

TEST_CASE("pipeline flags a no-signal configuration")
{
    const fs::path dir = fs::temp_directory_path() / "nanonmr_cli_nosig";
    const RunResult r = run_cli(
        "pipeline --n 20000 --seed 8 --phi-rms 0 --f-delta 4kHz --t-d 100us --tau "
        "10us --tau-o 15us --eta0 0.5 --eta1 0.25 --group-size 1 --n-starts 10 "
        "--out-dir "
        + dir.string());
    CHECK(r.exit_code == 0);
    const std::string stats = slurp(dir / "stats.json");
    CHECK(stats.find("\"no_signal_detected\": true") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("estimate slicing path emits a distribution")
{
    const fs::path trace = fs::temp_directory_path() / "nanonmr_cli_slice_trace.txt";
    CHECK(run_cli("simulate --protocol qdyne --n 40000 --seed 21 --f-delta 4kHz "
                  "--t-d 100us --tau 10us --tau-o 15us --phi-rms 0.5 --eta0 2.0 "
                  "--eta1 0.5 --envelope exp --out "
                  + trace.string())
              .exit_code
          == 0);
    const RunResult r = run_cli("estimate --trace " + trace.string()
                                + " --max-lag 1.5ms --block-duration 0.25s "
                                  "--group-size 1 --envelope exp --n-starts 40 --seed 2 "
                                  "--true-f-delta 4kHz");
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("\"rmse_f_hz\"") != std::string::npos);
    CHECK(r.stdout_text.find("\"n_groups\": 4") != std::string::npos);
    fs::remove(trace);
}

TEST_CASE("readout window optimization from CSV")
{
    const fs::path csv = fs::temp_directory_path() / "nanonmr_cli_readout.csv";
    {
        std::ofstream out(csv);
        out << "t_ns,counts0,counts1\n";
        for (int i = 1; i <= 100; ++i) {
            const double t = 10.0 * i;
            const double e0 = 0.04 * (1.0 - std::exp(-t / 300.0));
            out << t << "," << e0 << "," << 0.75 * e0 << "\n";
        }
    }
    const RunResult r = run_cli("optimize --readout-window " + csv.string());
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("\"t_snr_s\"") != std::string::npos);
    CHECK(r.stdout_text.find("\"degenerate\": false") != std::string::npos);
    fs::remove(csv);
}

TEST_CASE("ratio-map with delta coupled to T_D has a monotone R=1 contour")
{
    // T_D vs tau~ plane at chi = 25%, (delta/2pi) T_D = 1, tau_o = 2.1 us
    const RunResult r = run_cli(
        "ratio-map --x-axis t-d --x-range 20us:2ms:6 --y-axis tau-tilde --y-range "
        "3us:300us:8 --couple-delta-td 1 --tau-o 2.1us --eta0 0.04 --eta1 0.03 "
        "--total-time 100h --phi-rms 1");
    CHECK(r.exit_code == 0);

    // parse the CSV into columns
    std::istringstream in(r.stdout_text);
    std::string line;
    std::getline(in, line);  // header
    struct Row {
        double x, y, rd;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        Row row{};
        CHECK(std::sscanf(line.c_str(), "%lg,%lg,%lg", &row.x, &row.y, &row.rd) == 3);
        rows.push_back(row);
    }
    CHECK(rows.size() == 48);

    // for each T_D, the tau~ where R crosses 1 from above; must be monotone
    std::vector<double> crossing;
    for (int ix = 0; ix < 6; ++ix) {
        for (int iy = 0; iy + 1 < 8; ++iy) {
            const Row& lo = rows[iy * 6 + ix];
            const Row& hi = rows[(iy + 1) * 6 + ix];
            if (lo.rd >= 1.0 && hi.rd < 1.0) {
                crossing.push_back(lo.y);
                break;
            }
        }
    }
    CHECK(crossing.size() >= 3);
    for (std::size_t i = 1; i < crossing.size(); ++i)
        CHECK(crossing[i] >= crossing[i - 1]);
}

TEST_CASE("config file supplies defaults, flags override")
{
    const fs::path cfg = fs::temp_directory_path() / "nanonmr_cli_cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"kind": "exp", "z": "0:1:2"})" << "\n";
    }
    const RunResult from_cfg = run_cli("envelope --config " + cfg.string());
    CHECK(from_cfg.exit_code == 0);
    CHECK(from_cfg.stdout_text.find("1,0.36787944117144233") != std::string::npos);

    // explicit flag wins over the config value
    const RunResult overridden =
        run_cli("envelope --config " + cfg.string() + " --z 0:2:2");
    CHECK(overridden.exit_code == 0);
    CHECK(overridden.stdout_text.find("2,0.1353352832366127") != std::string::npos);
    fs::remove(cfg);
}
