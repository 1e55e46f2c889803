#include <algorithm>
#include <numeric>

#include "forge/error.hpp"
#include "forge/sql.hpp"
#include "forge/text.hpp"

namespace forge {

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

bool tables_share_column(const Table& a, const Table& b) {
    for (const Column& ca : a.columns) {
        for (const Column& cb : b.columns) {
            if (to_lower(ca.name) == to_lower(cb.name)) return true;
        }
    }
    return false;
}

}  // namespace

std::vector<Schema> compose_multitable(const std::vector<Schema>& schemas) {
    for (const Schema& s : schemas) {
        if (s.tables.size() != 1)
            throw ContractViolation("compose_multitable: schema '" + s.schema_id +
                                    "' is not single-table");
    }
    const std::size_t n = schemas.size();
    UnionFind uf(n);
    // A table joins a group only if its name stays unique inside it;
    // otherwise the merged schema would break the unique-table-name rule.
    auto group_has_name = [&](std::size_t root, const std::string& name) {
        for (std::size_t k = 0; k < n; ++k) {
            if (uf.find(k) == root && to_lower(schemas[k].tables[0].name) == name) return true;
        }
        return false;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!tables_share_column(schemas[i].tables[0], schemas[j].tables[0])) continue;
            const std::size_t ri = uf.find(i), rj = uf.find(j);
            if (ri == rj) continue;
            bool clash = false;
            for (std::size_t k = 0; k < n; ++k) {
                if (uf.find(k) != rj) continue;
                if (group_has_name(ri, to_lower(schemas[k].tables[0].name))) clash = true;
            }
            if (!clash) uf.unite(j, i);
        }
    }

    // Emit groups in first-member order; members keep input order.
    std::vector<Schema> out;
    std::vector<bool> done(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) continue;
        const std::size_t root = uf.find(i);
        std::vector<std::size_t> members;
        for (std::size_t k = i; k < n; ++k) {
            if (uf.find(k) == root) {
                members.push_back(k);
                done[k] = true;
            }
        }
        if (members.size() == 1) {
            out.push_back(schemas[i]);
            continue;
        }
        Schema merged;
        for (std::size_t m : members) {
            if (!merged.schema_id.empty()) merged.schema_id += "+";
            merged.schema_id += schemas[m].schema_id;
            merged.tables.push_back(schemas[m].tables[0]);
        }
        for (std::size_t a = 0; a < merged.tables.size(); ++a) {
            for (std::size_t b = a + 1; b < merged.tables.size(); ++b) {
                for (std::size_t ca = 0; ca < merged.tables[a].columns.size(); ++ca) {
                    for (std::size_t cb = 0; cb < merged.tables[b].columns.size(); ++cb) {
                        if (to_lower(merged.tables[a].columns[ca].name) ==
                            to_lower(merged.tables[b].columns[cb].name)) {
                            merged.foreign_keys.push_back({{a, ca}, {b, cb}});
                        }
                    }
                }
            }
        }
        merged.validate();
        out.push_back(std::move(merged));
    }
    return out;
}

}  // namespace forge
