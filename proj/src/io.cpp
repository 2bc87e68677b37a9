#include "bistable/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "bistable/errors.hpp"

namespace bistable {

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string branches_csv(const std::vector<BranchPoint>& pts) {
    std::string s = "gamma,v0,branch_index,transversal,residual\n";
    for (const auto& p : pts) {
        s += fmt_num(p.gamma) + "," + fmt_num(p.v0) + "," + std::to_string(p.branch_index) + "," +
             (p.transversal ? "1" : "0") + "," + fmt_num(p.residual) + "\n";
    }
    return s;
}

std::string profile_csv(const FrontProfile& fp) {
    std::string s = "# epsilon=" + fmt_num(fp.params.epsilon) + " tau=" + fmt_num(fp.params.tau);
    if (fp.params.regime == Regime::SuperSlow)
        s += " gamma=" + fmt_num(fp.params.gamma);
    else
        s += " g1=" + fmt_num(fp.params.g1);
    s += " v0=" + fmt_num(fp.v0);
    s += std::string(" construction=") +
         (fp.construction == FrontConstruction::BVPRefined ? "bvp_refined" : "composite") + "\n";
    s += "x,U,V\n";
    for (std::size_t j = 0; j < fp.x.size(); ++j)
        s += fmt_num(fp.x[j]) + "," + fmt_num(fp.U[j]) + "," + fmt_num(fp.V[j]) + "\n";
    return s;
}

std::string dispersion_csv(const std::vector<DispersionPoint>& pts) {
    std::string s = "k,re_lambda1,im_lambda1,re_lambda2,im_lambda2\n";
    for (const auto& p : pts) {
        s += fmt_num(p.k) + "," + fmt_num(p.lambda1.real()) + "," + fmt_num(p.lambda1.imag()) +
             "," + fmt_num(p.lambda2.real()) + "," + fmt_num(p.lambda2.imag()) + "\n";
    }
    return s;
}

std::string evans_scan_csv(const std::vector<EvansEvaluation>& evals) {
    std::string s = "re_lambda,im_lambda,re_D,im_D,log_scale\n";
    for (const auto& e : evals) {
        s += fmt_num(e.lambda.real()) + "," + fmt_num(e.lambda.imag()) + "," +
             fmt_num(e.D.mantissa.real()) + "," + fmt_num(e.D.mantissa.imag()) + "," +
             fmt_num(e.D.log_scale) + "\n";
    }
    return s;
}

std::string sim_series_csv(const SimSeries& s) {
    std::string out = "t,max_u,max_v,front_position\n";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        out += fmt_num(s.t[i]) + "," + fmt_num(s.max_u[i]) + "," + fmt_num(s.max_v[i]) + "," +
               fmt_num(s.front_pos[i]) + "\n";
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open output file " + path);
    f << content;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bistable
