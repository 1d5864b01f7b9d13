#include "pdeonet/spectral/problem.hpp"

#include "pdeonet/nn/errors.hpp"
#include "pdeonet/spectral/manufactured.hpp"

#include <fstream>

namespace pdeonet::spectral {

namespace {

Expr expr_at(const nlohmann::json& doc, const char* key)
{
    const auto& v = doc.at(key);
    if (v.is_number())
        return Expr(v.get<double>());
    return Expr::parse(v.get<std::string>());
}

Expr expr_of(const nlohmann::json& v)
{
    return v.is_number() ? Expr(v.get<double>()) : Expr::parse(v.get<std::string>());
}

} // namespace

ProblemSpec problem_from_json(const nlohmann::json& doc)
{
    try {
        ProblemSpec s;
        s.name = doc.value("name", std::string("problem"));
        const int d = doc.value("dimension", 1);
        const std::string kind = doc.value("kind", std::string("scalar"));
        if (kind == "scalar") {
            s.coefficient = CoefficientField::scalar(d, expr_at(doc, "a"), doc.at("a_min").get<double>(),
                                                     doc.at("a_max").get<double>());
        } else if (kind == "reaction_diffusion") {
            std::vector<Expr> A(static_cast<std::size_t>(d * d));
            const auto& rows = doc.at("A");
            if (static_cast<int>(rows.size()) != d)
                throw ShapeError("A must have d rows");
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n)
                    A[static_cast<std::size_t>(m + d * n)] = expr_of(rows.at(m).at(n));
            s.coefficient = CoefficientField::reaction_diffusion(
                d, std::move(A), expr_at(doc, "c"), doc.at("a_min").get<double>(),
                doc.at("a_max").get<double>(), doc.at("c_min").get<double>(), doc.at("c_max").get<double>());
        } else {
            throw PreconditionError("unknown coefficient kind '" + kind + "'");
        }
        if (doc.contains("u"))
            s.exact = expr_at(doc, "u");
        if (doc.contains("f"))
            s.source = expr_at(doc, "f");
        else if (s.exact)
            s.source = manufactured_source(*s.exact, s.coefficient);
        else
            throw PreconditionError("problem needs a source f or a manufactured solution u");
        s.p = doc.value("p", 4);
        s.q = doc.value("q", s.p + 1);
        if (doc.contains("family")) {
            const auto& fam = doc.at("family");
            FamilySpec f;
            for (const auto& m : fam.at("modes"))
                f.modes.push_back(expr_of(m));
            for (const auto& c : fam.at("coefficients"))
                f.coefficients.push_back(expr_of(c));
            for (const auto& b : fam.at("box"))
                f.box.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
            f.a_min = fam.at("a_min").get<double>();
            if (f.modes.size() != f.coefficients.size())
                throw ShapeError("family needs as many modes as coefficient functions");
            s.family = std::move(f);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw PreconditionError(std::string("malformed problem file: ") + e.what());
    }
}

ProblemSpec load_problem(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw PreconditionError("cannot open problem file " + file.string());
    return problem_from_json(nlohmann::json::parse(in));
}

ProblemSpec model_problem(int d)
{
    nlohmann::json doc;
    doc["name"] = d == 1 ? "model-1d" : "model-" + std::to_string(d) + "d";
    doc["dimension"] = d;
    doc["kind"] = "scalar";
    std::string a = "1";
    std::string u = "1";
    for (int m = 1; m <= d; ++m) {
        a += (m == 1 ? " + 0.5*sin(2*pi*x1)" : "");
        u += "*sin(2*pi*x" + std::to_string(m) + ")";
    }
    doc["a"] = a;
    doc["a_min"] = 0.5;
    doc["a_max"] = 1.5;
    doc["u"] = u.substr(2);
    doc["p"] = 4;
    return problem_from_json(doc);
}

} // namespace pdeonet::spectral
