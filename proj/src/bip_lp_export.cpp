#include <sstream>

#include "setplan/bip.hpp"
#include "setplan/error.hpp"

namespace setplan::bip {

namespace {

// LP readers historically cap line length; wrap well below that.
constexpr std::size_t kWrapColumn = 200;

void append_wrapped(std::string& out, std::string& line, const std::string& token) {
    if (line.size() + token.size() + 1 > kWrapColumn) {
        out += line;
        out += '\n';
        line = "     ";
    }
    line += ' ';
    line += token;
}

std::string coeff_token(const Rational& c, bool first) {
    Rational mag = c.is_negative() ? -c : c;
    std::string sign = c.is_negative() ? "-" : (first ? "" : "+");
    std::string body = mag.to_decimal();
    if (sign.empty()) return body;
    return sign + " " + body;
}

void emit_linear(std::string& out, std::string& line, const std::vector<LinearTerm>& terms,
                 const std::vector<std::string>& names) {
    bool first = true;
    for (const auto& t : terms) {
        if (t.coeff.is_zero()) continue;
        Rational mag = t.coeff.is_negative() ? -t.coeff : t.coeff;
        std::string token = coeff_token(t.coeff, first);
        if (mag == Rational(1)) {
            // drop the unit magnitude, keep the sign
            std::size_t sp = token.rfind(' ');
            token = sp == std::string::npos ? "" : token.substr(0, sp);
        }
        if (!token.empty()) append_wrapped(out, line, token);
        append_wrapped(out, line, names[static_cast<std::size_t>(t.var)]);
        first = false;
    }
    if (first) append_wrapped(out, line, "0");
}

}  // namespace

std::string export_lp(const BinaryProgram& program) {
    std::string out;
    out += "\\ 0-1 linear model, maximize sense\n";
    out += "Maximize\n";

    std::string line = " obj:";
    bool first = true;
    for (int v = 0; v < program.num_vars(); ++v) {
        const Rational& c = program.objective()[static_cast<std::size_t>(v)];
        if (c.is_zero()) continue;
        append_wrapped(out, line, coeff_token(c, first));
        append_wrapped(out, line, program.var_name(v));
        first = false;
    }
    if (!program.objective_constant().is_zero()) {
        append_wrapped(out, line, coeff_token(program.objective_constant(), first));
        first = false;
    }
    if (first) append_wrapped(out, line, "0");
    out += line;
    out += '\n';

    out += "Subject To\n";
    int auto_name = 0;
    for (const auto& c : program.constraints()) {
        std::string name = c.name.empty() ? "c" + std::to_string(auto_name) : c.name;
        ++auto_name;
        line = " " + name + ":";
        emit_linear(out, line, c.terms, program.var_names());
        const char* rel = c.relation == Relation::LessEq     ? "<="
                          : c.relation == Relation::GreaterEq ? ">="
                                                              : "=";
        append_wrapped(out, line, rel);
        append_wrapped(out, line, c.rhs.to_decimal());
        out += line;
        out += '\n';
    }

    out += "Binary\n";
    line = "";
    for (const auto& name : program.var_names()) append_wrapped(out, line, name);
    if (!line.empty()) {
        out += line;
        out += '\n';
    }
    out += "End\n";
    return out;
}

}  // namespace setplan::bip
