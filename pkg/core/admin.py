from django.contrib import admin

from .models import SweepPoint, SweepRun


class ReadOnlyAdmin(admin.ModelAdmin):
    """Los resultados solo se escriben desde `outage_sweep --save`."""

    def has_add_permission(self, request, obj=None):
        return False

    def has_change_permission(self, request, obj=None):
        return False


class SweepPointInline(admin.TabularInline):
    model = SweepPoint
    extra = 0
    can_delete = False
    readonly_fields = ("snr_db", "user", "scheme", "method", "p_out", "stderr", "trials", "error")

    def has_add_permission(self, request, obj=None):
        return False


@admin.register(SweepRun)
class SweepRunAdmin(ReadOnlyAdmin):
    list_display = ("id", "label", "preset", "snr_grid", "methods", "schemes", "seed", "trials", "created_at")
    search_fields = ("label", "preset")
    inlines = [SweepPointInline]


@admin.register(SweepPoint)
class SweepPointAdmin(ReadOnlyAdmin):
    list_display = ("run", "snr_db", "user", "scheme", "method", "p_out", "stderr")
    list_filter = ("scheme", "method", "user")

    def has_delete_permission(self, request, obj=None):
        return False
