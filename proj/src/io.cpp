#include "crowdfuse/io.hpp"

#include <fstream>
#include <sstream>

namespace crowdfuse::io {

namespace {

char response_char(crowd::Response r) {
    switch (r) {
        case crowd::Response::Zero: return '0';
        case crowd::Response::One: return '1';
        case crowd::Response::Skip: return 's';
    }
    return '?';
}

crowd::Response response_from(char c) {
    switch (c) {
        case '0': return crowd::Response::Zero;
        case '1': return crowd::Response::One;
        case 's': return crowd::Response::Skip;
    }
    throw ParseError(std::string("AnswerMatrix: bad response character '") + c + "'");
}

}  // namespace

nlohmann::json matrix_to_json(const crowd::AnswerMatrix& m) {
    nlohmann::json j;
    std::vector<std::string> rows(m.W);
    for (int w = 0; w < m.W; ++w) {
        std::string& row = rows[w];
        row.resize(m.columns());
        for (int q = 0; q < m.columns(); ++q) row[q] = response_char(m.at(w, q));
    }
    std::string truth(m.columns(), '0'), kinds(m.columns(), 'c');
    for (int q = 0; q < m.columns(); ++q) {
        truth[q] = m.truth[q] ? '1' : '0';
        kinds[q] = m.column_kind[q] == crowd::ColumnKind::Gold ? 'g' : 'c';
    }
    j["responses"] = rows;
    j["truth"] = truth;
    j["column_kind"] = kinds;
    j["seed"] = m.seed;
    j["config_digest"] = m.config_digest;
    return j;
}

crowd::AnswerMatrix matrix_from_json(const nlohmann::json& j) {
    crowd::AnswerMatrix m;
    try {
        const auto rows = j.at("responses").get<std::vector<std::string>>();
        const auto truth = j.at("truth").get<std::string>();
        const auto kinds = j.at("column_kind").get<std::string>();
        m.seed = j.value("seed", std::uint64_t{0});
        m.config_digest = j.value("config_digest", std::string{});
        if (rows.empty()) throw ParseError("AnswerMatrix: no workers");
        const int Q = static_cast<int>(rows.front().size());
        if (Q == 0) throw ParseError("AnswerMatrix: no questions");
        if (static_cast<int>(truth.size()) != Q || static_cast<int>(kinds.size()) != Q)
            throw ParseError("AnswerMatrix: truth/column_kind length mismatch");
        m.W = static_cast<int>(rows.size());
        m.N = 0;
        m.G = 0;
        m.truth.resize(Q);
        m.column_kind.resize(Q);
        for (int q = 0; q < Q; ++q) {
            if (truth[q] != '0' && truth[q] != '1')
                throw ParseError("AnswerMatrix: truth must be 0/1");
            m.truth[q] = truth[q] == '1';
            switch (kinds[q]) {
                case 'c': m.column_kind[q] = crowd::ColumnKind::Classification; ++m.N; break;
                case 'g': m.column_kind[q] = crowd::ColumnKind::Gold; ++m.G; break;
                default: throw ParseError("AnswerMatrix: column_kind must be c/g");
            }
        }
        if (m.N == 0) throw ParseError("AnswerMatrix: need at least one classification column");
        m.responses.resize(static_cast<std::size_t>(m.W) * Q);
        for (int w = 0; w < m.W; ++w) {
            if (static_cast<int>(rows[w].size()) != Q)
                throw ParseError("AnswerMatrix: ragged response rows");
            for (int q = 0; q < Q; ++q)
                m.responses[static_cast<std::size_t>(w) * Q + q] = response_from(rows[w][q]);
        }
        m.worker_kind.assign(m.W, crowd::WorkerKind::Honest);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("AnswerMatrix: ") + e.what());
    }
    return m;
}

std::string matrix_to_csv(const crowd::AnswerMatrix& m) {
    std::ostringstream out;
    out << "worker";
    for (int q = 0; q < m.columns(); ++q) out << ",q" << q + 1;
    out << "\n#kind";
    for (int q = 0; q < m.columns(); ++q)
        out << ',' << (m.column_kind[q] == crowd::ColumnKind::Gold ? 'g' : 'c');
    out << "\n#truth";
    for (int q = 0; q < m.columns(); ++q) out << ',' << (m.truth[q] ? '1' : '0');
    out << '\n';
    for (int w = 0; w < m.W; ++w) {
        out << w;
        for (int q = 0; q < m.columns(); ++q) out << ',' << response_char(m.at(w, q));
        out << '\n';
    }
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

crowd::AnswerMatrix matrix_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(split_csv_line(line));
    if (rows.size() < 4 || rows[0].empty() || rows[0][0] != "worker" ||
        rows[1][0] != "#kind" || rows[2][0] != "#truth")
        throw ParseError("AnswerMatrix CSV: expected worker/#kind/#truth header rows");
    const int Q = static_cast<int>(rows[0].size()) - 1;
    if (Q < 1) throw ParseError("AnswerMatrix CSV: no question columns");
    crowd::AnswerMatrix m;
    m.W = static_cast<int>(rows.size()) - 3;
    m.N = 0;
    m.G = 0;
    m.truth.resize(Q);
    m.column_kind.resize(Q);
    for (int q = 0; q < Q; ++q) {
        const std::string& kind = rows[1].at(q + 1);
        if (kind == "c") {
            m.column_kind[q] = crowd::ColumnKind::Classification;
            ++m.N;
        } else if (kind == "g") {
            m.column_kind[q] = crowd::ColumnKind::Gold;
            ++m.G;
        } else {
            throw ParseError("AnswerMatrix CSV: column kind must be c/g");
        }
        const std::string& t = rows[2].at(q + 1);
        if (t != "0" && t != "1") throw ParseError("AnswerMatrix CSV: truth must be 0/1");
        m.truth[q] = t == "1";
    }
    if (m.N == 0) throw ParseError("AnswerMatrix CSV: need a classification column");
    for (std::size_t r = 3; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != Q + 1)
            throw ParseError("AnswerMatrix CSV: ragged worker row");
        for (int q = 0; q < Q; ++q) {
            const std::string& cell = rows[r][q + 1];
            if (cell.size() != 1) throw ParseError("AnswerMatrix CSV: bad cell");
            m.responses.push_back(response_from(cell[0]));
        }
    }
    m.worker_kind.assign(m.W, crowd::WorkerKind::Honest);
    return m;
}

nlohmann::json estimates_to_json(const inference::CrowdEstimates& e) {
    return nlohmann::json{
        {"m_hat", e.m_hat},
        {"mu_hat", e.mu_hat},
        {"M0_hat", e.M0_hat},
        {"MN_hat", e.MN_hat},
        {"log_likelihood", e.log_likelihood},
        {"method_mu",
         e.method_mu == inference::MuMethod::GoldTraining ? "gold-training" : "majority-vote"},
    };
}

nlohmann::json decision_to_json(const fusion::ClassDecision& d) {
    std::string word(d.word.size(), '0');
    for (std::size_t i = 0; i < d.word.size(); ++i) word[i] = d.word[i] ? '1' : '0';
    return nlohmann::json{
        {"word", word},
        {"class_index", d.class_index},
        {"margins", d.per_bit_margin},
    };
}

std::string surface_to_csv(const std::vector<inference::SurfacePoint>& pts) {
    std::ostringstream out;
    out << "M0,MN,log_likelihood\n";
    out.precision(17);
    for (const auto& p : pts) out << p.M0 << ',' << p.MN << ',' << p.log_likelihood << '\n';
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << contents;
}

}  // namespace crowdfuse::io
