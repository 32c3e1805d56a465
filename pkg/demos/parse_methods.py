"""Extract method declarations from Java source text.

The parser works on plain strings, so it handles deleted revisions that
exist only in Git's object store just as well as files on disk.
"""

from churnscope import extract_methods, normalize_tokens

SOURCE = """\
package com.example.billing;

import java.util.List;

public class InvoiceService extends BaseService {
    private final Runnable audit = new Runnable() {
        public void run() { log("audit"); }   // anonymous: not a tracked method
    };

    public InvoiceService() {
        super("invoices");
    }

    @Override
    public double total(List<Invoice> invoices, double... discounts) {
        double sum = 0;   // a comment is not a token
        for (Invoice i : invoices) sum += i.amount();
        return sum;
    }

    static class Formatter {
        String format(double amount) { return String.format("%.2f", amount); }
    }
}
"""

result = extract_methods(SOURCE, "src/com/example/billing/InvoiceService.java")
print(f"degraded parse: {result.degraded}")
print(f"class hierarchy: {result.hierarchy}\n")

for m in result:
    print(m.identity.canonical)
    print(f"    lines {m.start_line}-{m.end_line}, {len(m.body_tokens)} body tokens")

print("\nTokens ignore layout and comments:")
print(normalize_tokens('sum  +=\n   i.amount(); // running total'))
print(normalize_tokens('String s = "two words";'))

# Broken braces make the whole file degraded rather than half-parsed.
broken = extract_methods("class A { void f() { ", "A.java")
print(f"\nunbalanced file -> degraded={broken.degraded}, methods={list(broken)}")
