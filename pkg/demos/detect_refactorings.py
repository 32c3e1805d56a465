"""Find refactorings between two revisions and carry statistics across them.

A rename keeps the method's history; an extracted method starts with one
change; an inlined method's history disappears and its host gains one.
"""

from churnscope import ChangeModel, FileChange, FileChangeKind, MethodStats, apply_refactorings
from churnscope.pipeline import analyze_changes

BEFORE = """\
package shop;

class Cart {
    int totalPrice(int qty, int unit) {
        int base = qty * unit;
        if (base > 1000) { base -= base / 10; }
        audit("total", base);
        return base;
    }

    void checkout(Order order) {
        validate(order);
        int cents = order.amount() * 100;
        int fee = cents / 50;
        payments.charge(order.customer(), cents + fee);
        mailer.receipt(order.customer(), cents + fee);
        audit("checkout", cents);
    }
}
"""

# totalPrice is renamed to priceFor; the payment block of checkout moves into chargeAndMail
AFTER = """\
package shop;

class Cart {
    int priceFor(int qty, int unit) {
        int base = qty * unit;
        if (base > 1000) { base -= base / 10; }
        audit("total", base);
        return base;
    }

    void checkout(Order order) {
        validate(order);
        chargeAndMail(order);
        audit("checkout", order.amount());
    }

    void chargeAndMail(Order order) {
        int cents = order.amount() * 100;
        int fee = cents / 50;
        payments.charge(order.customer(), cents + fee);
        mailer.receipt(order.customer(), cents + fee);
    }
}
"""

path = "src/shop/Cart.java"
change = FileChange(path, path, FileChangeKind.MODIFIED, BEFORE, AFTER)
matchings, events, _ = analyze_changes([change])

for e in events:
    print(f"{e.kind.value:14} before={e.before and e.before.method_name} "
          f"after={e.after.method_name} host={e.host and e.host.method_name}")

# Pretend totalPrice already had four changes this week.
model = ChangeModel()
old = next(e.before for e in events if e.kind.value == "RenameMethod")
model.upsert_stats(MethodStats(old, 4, {"2024-03-04": 3, "2024-03-05": 1}))

apply_refactorings(model, events, day="2024-03-07")
print()
for s in model.all_stats():
    print(f"{s.identity.qualified_name:22} total={s.total_changes} daily={s.daily}")
