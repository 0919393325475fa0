from django.urls import path

from . import views

app_name = "core"

urlpatterns = [
    path("", views.runs, name="runs"),
    path("runs/<int:run_id>/", views.run_detail, name="run_detail"),
    path("runs/<int:run_id>/csv/", views.run_csv, name="run_csv"),
    path("healthz/", views.healthz, name="healthz"),
]
